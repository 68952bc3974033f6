"""Energy-feature classification tests"""

import numpy as np
import pytest

from core.errors import ConfigError, DataError, InvariantViolation
from models.dataset import Dataset, concat_datasets
from models.feature_model import RbmModel
from models.herd_state import TransformParams
from services.classification import (
    ClassPipelineResult,
    EnergyStandardizer,
    build_feature_table,
    case_energies,
    case_energy,
    default_window,
    run_class_pipeline,
    split_rows,
    standardize,
    verify_zscore_moments,
)
from services.herding import ChainConfig, HerdingEngine
from services.synthetic import structured_pattern_splits


@pytest.fixture
def pattern_splits():
    """Three 4x4 pattern classes, 6/3/3 cases per class"""
    return structured_pattern_splits(sizes=(6, 3, 3), side=4, noise=0.05, seed=17)


@pytest.fixture
def pattern_rbm():
    return RbmModel(D=16, K=4)


class TestCaseEnergy:
    """Test energies after hidden maximization."""

    def test_zero_weights(self, small_rbm):
        assert case_energy(small_rbm, np.zeros(small_rbm.num_features), np.ones(6)) == 0.0

    def test_fully_observed(self, one_spin_model):
        """Test g(x) = x, w = 1, x = +1 gives -1."""
        assert case_energy(one_spin_model, np.array([1.0]), 1) == -1.0

    def test_rbm_pairwise(self):
        """Test D = K = 1, w = (0, 0, 1), x = +1 gives -1 with z* = +1."""
        model = RbmModel(D=1, K=1)

        assert case_energy(model, np.array([0.0, 0.0, 1.0]), np.array([1])) == -1.0

    def test_transform_applied(self):
        """Test that the effective coefficients are used when a transform is given."""
        model = RbmModel(D=1, K=1)
        transform = TransformParams(gamma=2.0, offset=np.array([0.0, 0.0, 0.5]))

        assert case_energy(model, np.array([0.0, 0.0, 1.0]), np.array([1]), transform) == -3.0


class TestStandardize:
    """Test Z-score standardization."""

    def test_examples(self):
        """Test train energies (1, 2, 3)."""
        std = EnergyStandardizer.from_energies(np.array([1.0, 2.0, 3.0]))

        assert std.mu_trn == 2.0
        assert std.sigma_trn == pytest.approx(np.sqrt(2 / 3))
        np.testing.assert_allclose(
            standardize(np.array([2.0, 3.0]), std), [0.0, 1.224745], atol=1e-6
        )

    def test_shift_invariance(self, rng):
        energies = rng.normal(size=20)
        query = rng.normal(size=5)
        base = standardize(query, EnergyStandardizer.from_energies(energies))
        shifted = standardize(query + 7.5, EnergyStandardizer.from_energies(energies + 7.5))

        np.testing.assert_allclose(shifted, base, atol=1e-12)

    def test_zero_spread(self):
        std = EnergyStandardizer.from_energies(np.array([4.0, 4.0]))
        with pytest.raises(DataError):
            standardize(np.array([1.0]), std)

    def test_empty(self):
        with pytest.raises(DataError):
            EnergyStandardizer.from_energies(np.array([]))


class TestClassPipeline:
    """Test one class chain."""

    def test_window_of_one_is_that_iterations_zscores(self, small_rbm, small_rbm_data):
        """Test that a length-1 window returns the Z-scores of that iteration."""
        config = ChainConfig()
        result = run_class_pipeline(
            small_rbm, small_rbm_data, small_rbm_data, config, total_iters=10, eval_window=(7, 7)
        )
        with HerdingEngine(small_rbm, small_rbm_data, config) as engine:
            state = engine.init_chain()
            for _ in range(7):
                state = engine.step(state)
        visibles = small_rbm_data.visibles_for(small_rbm)
        energies = case_energies(small_rbm, state.w, visibles)
        expected = standardize(energies, EnergyStandardizer.from_energies(energies))

        assert result.iterations == 1
        np.testing.assert_allclose(result.averaged, expected, atol=1e-12)

    def test_duplicate_eval_cases_give_identical_rows(self, small_rbm, small_rbm_data):
        eval_cases = Dataset(cases=small_rbm_data.cases[[0, 3, 0, 3]])
        result = run_class_pipeline(
            small_rbm, small_rbm_data, eval_cases, ChainConfig(), total_iters=20
        )

        np.testing.assert_allclose(result.averaged[:2], result.averaged[2:], rtol=0, atol=1e-12)

    def test_training_cases_average_to_zero(self, small_rbm, small_rbm_data):
        """Test that scoring the class's own training set gives mean-zero features."""
        result = run_class_pipeline(
            small_rbm, small_rbm_data, small_rbm_data, ChainConfig(), total_iters=40
        )

        assert result.iterations == 20
        assert abs(result.averaged.mean()) <= 1e-9

    def test_training_zscores_are_standard(self, small_rbm, small_rbm_data):
        result = run_class_pipeline(
            small_rbm, small_rbm_data, small_rbm_data, ChainConfig(), total_iters=30
        )

        verify_zscore_moments([result])
        assert len(result.train_zscore_moments) == result.iterations

    def test_zero_spread_iterations_skipped(self, small_rbm):
        """Test that a class of identical cases never standardizes."""
        same = Dataset(cases=np.tile(np.array([1, -1, 1, 1, -1, -1], dtype=np.int8), (5, 1)))
        result = run_class_pipeline(small_rbm, same, same, ChainConfig(), total_iters=10)

        assert result.iterations == 0
        assert result.skipped == 5
        np.testing.assert_array_equal(result.averaged, np.zeros(5))

    @pytest.mark.parametrize("window", [(0, 5), (6, 5), (3, 11)])
    def test_window_bounds(self, window, small_rbm, small_rbm_data):
        with pytest.raises(ConfigError):
            run_class_pipeline(
                small_rbm,
                small_rbm_data,
                small_rbm_data,
                ChainConfig(),
                total_iters=10,
                eval_window=window,
            )

    def test_default_window(self):
        assert default_window(2000) == (1001, 2000)
        assert default_window(1) == (1, 1)


class TestFeatureTable:
    """Test the per-class feature table."""

    def test_columns_in_label_order(self, pattern_rbm, pattern_splits):
        train, valid, test = pattern_splits
        eval_cases = concat_datasets([valid, test])
        config = ChainConfig(freeze_hidden_bias=True)
        table, results = build_feature_table(pattern_rbm, train, eval_cases, config, total_iters=20)

        assert table.class_labels == [0, 1, 2]
        assert table.shape == (18, 3)
        assert [r.label for r in results] == [0, 1, 2]
        np.testing.assert_array_equal(table.labels, eval_cases.labels)
        verify_zscore_moments(results)

    def test_threads_do_not_change_table(self, pattern_rbm, pattern_splits):
        train, valid, _ = pattern_splits
        tables = [
            build_feature_table(
                pattern_rbm, train, valid, ChainConfig(), total_iters=10, threads=n
            )[0]
            for n in (1, 3)
        ]

        np.testing.assert_array_equal(tables[0].features, tables[1].features)

    def test_single_class_rejected(self, small_rbm, small_rbm_data):
        labelled = Dataset(cases=small_rbm_data.cases, labels=np.zeros(12, dtype=np.int64))
        with pytest.raises(DataError):
            build_feature_table(small_rbm, labelled, labelled, ChainConfig(), total_iters=4)

    def test_unlabelled_rejected(self, small_rbm, small_rbm_data):
        with pytest.raises(DataError):
            build_feature_table(small_rbm, small_rbm_data, small_rbm_data, ChainConfig())

    def test_split_rows(self, pattern_rbm, pattern_splits):
        train, valid, test = pattern_splits
        eval_cases = concat_datasets([valid, test])
        table, _ = build_feature_table(pattern_rbm, train, eval_cases, ChainConfig(), total_iters=4)
        head, tail = split_rows(table, [9, 9])

        np.testing.assert_array_equal(head.features, table.features[:9])
        np.testing.assert_array_equal(tail.labels, test.labels)
        with pytest.raises(DataError):
            split_rows(table, [9, 8])


def test_zscore_violation_reported():
    """Test that a non-standard moment is flagged."""
    bad = ClassPipelineResult(
        label=1,
        averaged=np.zeros(2),
        iterations=1,
        skipped=0,
        train_zscore_moments=[(0.0, 1.0), (1e-6, 1.0)],
    )
    with pytest.raises(InvariantViolation, match="class 1"):
        verify_zscore_moments([bad])


def test_zscore_default_tolerance_is_tight():
    """Test that a variance off by 1e-10 fails the default check but passes a looser one."""
    off = ClassPipelineResult(
        label=0,
        averaged=np.zeros(2),
        iterations=1,
        skipped=0,
        train_zscore_moments=[(0.0, 1.0 + 1e-10)],
    )
    with pytest.raises(InvariantViolation, match="class 0"):
        verify_zscore_moments([off])
    verify_zscore_moments([off], tol=1e-9)
