"""Synthetic data tests"""

import numpy as np
import pytest

from core.errors import ConfigError, DataError
from services.synthetic import (
    PATTERN_CLASSES,
    build_sin_cos_system,
    grid_means,
    prototype_spin_cases,
    random_spin_cases,
    sin_cos_grid,
    structured_pattern_class,
    structured_pattern_splits,
)


class TestSinCos:
    """Test the sin/cos system."""

    def test_unit_step_grid(self):
        """Test seven points from -pi, the last at 2.858."""
        grid = sin_cos_grid(1.0)

        assert grid.size == 7
        assert grid[0] == -np.pi
        assert grid[-1] == pytest.approx(2.858407, abs=1e-6)

    def test_system(self):
        model, data = build_sin_cos_system()

        assert model.joint_count == 7
        assert model.num_features == 2
        assert data.num_cases == 7
        np.testing.assert_array_equal(data.visibles_for(model), np.arange(7))
        np.testing.assert_allclose(
            grid_means(model),
            [np.sin(sin_cos_grid(1.0)).mean(), np.cos(sin_cos_grid(1.0)).mean()],
            atol=1e-15,
        )

    def test_too_coarse(self):
        with pytest.raises(ConfigError):
            build_sin_cos_system(step=4.0)

    def test_bad_step(self):
        with pytest.raises(ConfigError):
            sin_cos_grid(0.0)


class TestSpinCases:
    """Test random spin data."""

    def test_distinct(self):
        ds = random_spin_cases(16, 4, seed=1)

        assert len({row.tobytes() for row in ds.cases}) == 16
        assert ds.is_spin()

    def test_too_many_distinct(self):
        with pytest.raises(DataError):
            random_spin_cases(17, 4)

    def test_prototypes_seeded(self):
        a = prototype_spin_cases(10, 8, seed=4)
        b = prototype_spin_cases(10, 8, seed=4)

        np.testing.assert_array_equal(a.cases, b.cases)
        assert a.is_spin()

    def test_flip_probability_range(self):
        with pytest.raises(ConfigError):
            prototype_spin_cases(4, 4, flip_prob=0.7)


class TestPatterns:
    """Test the structured pattern classes."""

    def test_noise_free_structure(self):
        rows = structured_pattern_class("row_stripes", 3, side=4, noise=0.0).cases
        cols = structured_pattern_class("column_stripes", 3, side=4, noise=0.0).cases
        rows, cols = rows.reshape(3, 4, 4), cols.reshape(3, 4, 4)

        assert np.all(rows == rows[:, :, :1])
        assert np.all(cols == cols[:, :1, :])

    def test_blocks_need_even_side(self):
        with pytest.raises(ConfigError):
            structured_pattern_class("blocks", 2, side=5)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            structured_pattern_class("checkers", 2)

    def test_splits(self):
        train, valid, test = structured_pattern_splits(sizes=(4, 2, 2), side=4, seed=3)

        assert train.num_cases == 4 * len(PATTERN_CLASSES)
        assert train.dim == 16
        np.testing.assert_array_equal(valid.labels, [0, 0, 1, 1, 2, 2])
        assert test.is_spin()
