"""Command-line tests for the herd and synthetic-data scripts"""

import json

import numpy as np
import pytest

from core.config import get_settings
from models.feature_model import RbmModel
from parsers.dataset_parser import load_dataset, read_vector
from scripts.generate_synthetic import main as generate_main
from scripts.herd import main
from services.exporters import write_spin_dataset
from services.herding import ChainConfig, HerdingEngine
from services.synthetic import prototype_spin_cases, structured_pattern_splits

CHAIN_FILES = ("trajectory.csv", "weights.txt", "samples.txt", "summary.json")


@pytest.fixture
def spin_file(tmp_path):
    ds = prototype_spin_cases(20, 4, num_prototypes=2, flip_prob=0.2, seed=1)
    return write_spin_dataset(tmp_path / "spins.txt", ds.cases)


def write_class_dir(path, splits):
    for name, ds in zip(("train", "valid", "test"), splits, strict=True):
        for label in np.unique(ds.labels):
            write_spin_dataset(path / f"{name}_{label}.txt", ds.for_class(int(label)).cases)
    return path


@pytest.fixture
def pattern_dir(tmp_path):
    splits = structured_pattern_splits(sizes=(6, 3, 3), side=4, noise=0.05, seed=5)
    return write_class_dir(tmp_path / "patterns", splits)


def read_lines(path):
    return path.read_text().splitlines()


class TestRun:
    """Test herd run."""

    def test_tiny_run(self, tmp_path, spin_file):
        out = tmp_path / "out"
        code = main(
            ["run", "--data", str(spin_file), "--hidden", "2", "--steps", "10",
             "--record-every", "2", "--out", str(out)]
        )  # fmt: skip

        assert code == 0
        assert len(read_lines(out / "trajectory.csv")) == 1 + 5
        assert read_lines(out / "weights.txt")[0] == str(4 + 2 + 2 * 4)
        assert len(read_lines(out / "samples.txt")) == 5
        assert json.loads((out / "summary.json").read_text())["t"] == 10
        assert json.loads((out / "effective_config.json").read_text())["steps"] == 10

    def test_rerun_is_byte_identical(self, tmp_path, spin_file):
        for name in ("a", "b"):
            args = ["run", "--data", str(spin_file), "--hidden", "3", "--variant", "safe"]
            assert main(args + ["--steps", "30", "--out", str(tmp_path / name)]) == 0

        for name in CHAIN_FILES:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_thread_count_does_not_change_outputs(self, tmp_path, monkeypatch):
        """Test HERD_THREADS=1 and 4 give byte-identical files."""
        ds = prototype_spin_cases(600, 6, num_prototypes=3, flip_prob=0.2, seed=8)
        data = write_spin_dataset(tmp_path / "many.txt", ds.cases)
        for threads in ("1", "4"):
            monkeypatch.setenv("HERD_THREADS", threads)
            get_settings.cache_clear()
            args = ["run", "--data", str(data), "--hidden", "3", "--steps", "20"]
            assert main(args + ["--out", str(tmp_path / threads)]) == 0

        for name in CHAIN_FILES:
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()

    def test_zero_steps_is_config_error(self, tmp_path, spin_file):
        assert main(["run", "--data", str(spin_file), "--steps", "0", "--out", str(tmp_path)]) == 2

    def test_missing_data_file(self, tmp_path):
        args = ["run", "--data", str(tmp_path / "absent.txt"), "--out", str(tmp_path / "out")]

        assert main(args) == 3

    def test_dimension_mismatch(self, tmp_path, spin_file):
        args = ["run", "--data", str(spin_file), "--visible", "5", "--out", str(tmp_path / "out")]

        assert main(args) == 3

    def test_decoupled_needs_rates(self, tmp_path):
        args = ["run", "--visible", "4", "--variant", "decoupled", "--out", str(tmp_path)]

        assert main(args) == 2

    def test_flags_override_config_file(self, tmp_path, spin_file):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"data": str(spin_file), "hidden": 1, "steps": 50}))
        out = tmp_path / "out"

        assert main(["run", "--config", str(config), "--steps", "3", "--out", str(out)]) == 0
        assert len(read_lines(out / "trajectory.csv")) == 1 + 3

    def test_unknown_config_key(self, tmp_path, spin_file):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"data": str(spin_file), "stpes": 5}))

        assert main(["run", "--config", str(config), "--out", str(tmp_path / "out")]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2

    def test_enumerated_model_from_files(self, tmp_path):
        """Test the sin/cos system written by the generator and run from its files."""
        data_dir = tmp_path / "sincos"
        assert generate_main(["sincos", "--out", str(data_dir)]) == 0
        out = tmp_path / "out"
        code = main(
            ["run", "--model", "enumerated", "--model-file", str(data_dir / "sincos_model.txt"),
             "--data", str(data_dir / "sincos_data.txt"), "--variant", "idealized",
             "--steps", "50", "--out", str(out)]
        )  # fmt: skip

        assert code == 0
        assert read_lines(out / "weights.txt")[0] == "2"
        assert len(read_lines(out / "samples.txt")) == 50


class TestDemoTipi:
    """Test herd demo-tipi."""

    def test_two_point_grid_rejected(self, tmp_path):
        assert main(["demo-tipi", "--grid-points", "2", "--out", str(tmp_path)]) == 2

    def test_surface_and_orbit(self, tmp_path):
        out = tmp_path / "demo"
        args = ["demo-tipi", "--grid-points", "5", "--steps", "200", "--out", str(out)]

        assert main(args) == 0
        surface = np.loadtxt(out / "tipi_surface.csv", delimiter=",", skiprows=1)
        assert surface.shape == (25, 3)
        assert np.all(surface[:, 2] <= 1e-12)
        assert len(read_lines(out / "orbit.csv")) == 1 + 200
        summary = json.loads((out / "summary.json").read_text())
        assert summary["orbit_half_width"] <= 10

    def test_thread_count_does_not_change_outputs(self, tmp_path, monkeypatch):
        for threads in ("1", "4"):
            monkeypatch.setenv("HERD_THREADS", threads)
            get_settings.cache_clear()
            args = ["demo-tipi", "--grid-points", "7", "--steps", "300"]
            assert main(args + ["--out", str(tmp_path / threads)]) == 0

        for name in ("tipi_surface.csv", "orbit.csv", "summary.json"):
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()


class TestRates:
    """Test herd rates and herd sample."""

    def test_one_step_rates_are_first_driving_term(self, tmp_path, spin_file):
        out = tmp_path / "out"
        args = ["rates", "--data", str(spin_file), "--hidden", "2", "--steps", "1"]
        assert main(args + ["--out", str(out)]) == 0

        model = RbmModel(D=4, K=2)
        with HerdingEngine(model, load_dataset(spin_file), ChainConfig()) as engine:
            first = engine.step(engine.init_chain())
        np.testing.assert_array_equal(read_vector(out / "rates.txt"), first.driving_moment)

    def test_filters_need_dimensions(self, tmp_path, spin_file):
        args = ["rates", "--data", str(spin_file), "--hidden", "2", "--export-filters"]

        assert main(args + ["--out", str(tmp_path)]) == 2

    def test_decoupled_follow_up_and_filters(self, tmp_path, spin_file):
        out = tmp_path / "out"
        code = main(
            ["rates", "--data", str(spin_file), "--hidden", "2", "--steps", "40",
             "--decoupled-steps", "25", "--export-filters", "--filter-height", "2",
             "--filter-width", "2", "--out", str(out)]
        )  # fmt: skip

        assert code == 0
        assert len(read_lines(out / "decoupled_samples.txt")) == 25
        filters = sorted(p.name for p in (out / "filters").iterdir())
        assert filters == ["rate_filter_0000.pgm", "rate_filter_0001.pgm"]
        assert (out / "filters" / filters[0]).read_bytes().startswith(b"P5")

    def test_thread_count_does_not_change_outputs(self, tmp_path, monkeypatch):
        """Test HERD_THREADS=1 and 4 give byte-identical rates and decoupled chains."""
        ds = prototype_spin_cases(600, 6, num_prototypes=3, flip_prob=0.2, seed=8)
        data = write_spin_dataset(tmp_path / "many.txt", ds.cases)
        for threads in ("1", "4"):
            monkeypatch.setenv("HERD_THREADS", threads)
            get_settings.cache_clear()
            code = main(
                ["rates", "--data", str(data), "--hidden", "3", "--steps", "20",
                 "--decoupled-steps", "15", "--out", str(tmp_path / threads)]
            )  # fmt: skip
            assert code == 0

        names = ("rates.txt", *CHAIN_FILES, *(f"decoupled_{name}" for name in CHAIN_FILES))
        for name in names:
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()

    def test_sample_from_snapshot(self, tmp_path, spin_file):
        learned = tmp_path / "learned"
        args = ["rates", "--data", str(spin_file), "--hidden", "2", "--steps", "30"]
        assert main(args + ["--out", str(learned)]) == 0

        out = tmp_path / "sampled"
        code = main(
            ["sample", "--visible", "4", "--hidden", "2",
             "--w0-file", str(learned / "weights.txt"),
             "--rates-file", str(learned / "rates.txt"),
             "--steps", "15", "--out", str(out)]
        )  # fmt: skip

        assert code == 0
        rows = read_lines(out / "samples.txt")
        assert len(rows) == 15
        assert all(set(r.split()) <= {"1", "-1"} for r in rows)

    def test_sample_needs_snapshot(self, tmp_path, spin_file):
        args = ["sample", "--visible", "4", "--rates-file", str(spin_file), "--out", str(tmp_path)]

        assert main(args) == 2


class TestClassify:
    """Test herd classify."""

    def test_single_class(self, tmp_path):
        for split in ("train", "valid", "test"):
            write_spin_dataset(tmp_path / f"{split}_0.txt", np.array([[1, -1], [1, 1]]))

        assert main(["classify", "--data-dir", str(tmp_path), "--out", str(tmp_path)]) == 3

    def test_baselines_on_training_cases(self, tmp_path):
        """Test that 1NN scores 1.0 when the test set equals the training set."""
        classes = {
            0: np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, 1]]),
            1: np.array([[-1, -1, -1, -1], [-1, 1, -1, 1], [-1, -1, 1, -1]]),
        }
        data_dir = tmp_path / "data"
        for label, cases in classes.items():
            for split in ("train", "valid", "test"):
                write_spin_dataset(data_dir / f"{split}_{label}.txt", cases)
        out = tmp_path / "out"
        code = main(
            ["classify", "--data-dir", str(data_dir), "--methods", "pixel_mlr", "knn1",
             "--out", str(out)]
        )  # fmt: skip

        assert code == 0
        lines = [line.split() for line in read_lines(out / "metrics.txt")]
        assert [name for name, _ in lines] == ["pixel_mlr", "knn1"]
        assert float(lines[1][1]) == 1.0

    def test_herding_methods(self, tmp_path, pattern_dir):
        out = tmp_path / "out"
        code = main(
            ["classify", "--data-dir", str(pattern_dir), "--hidden", "2", "--iters", "20",
             "--methods", "herding_sh", "herding_h", "--out", str(out)]
        )  # fmt: skip

        assert code == 0
        lines = [line.split() for line in read_lines(out / "metrics.txt")]
        assert [name for name, _ in lines] == ["herding_h", "herding_sh"]
        assert all(0.0 <= float(value) <= 1.0 for _, value in lines)
        header, *rows = read_lines(out / "features_herding_sh.csv")
        assert header.split(",")[2:] == ["energy_class_0", "energy_class_1", "energy_class_2"]
        assert len(rows) == 9 + 9

    def test_bad_window(self, tmp_path, pattern_dir):
        args = ["classify", "--data-dir", str(pattern_dir), "--iters", "10", "--window-end", "11"]

        assert main(args + ["--out", str(tmp_path)]) == 2

    def test_thread_count_does_not_change_report(self, tmp_path, pattern_dir, monkeypatch):
        for threads in ("1", "4"):
            monkeypatch.setenv("HERD_THREADS", threads)
            get_settings.cache_clear()
            code = main(
                ["classify", "--data-dir", str(pattern_dir), "--hidden", "2", "--iters", "10",
                 "--methods", "herding_sh", "--out", str(tmp_path / threads)]
            )  # fmt: skip
            assert code == 0

        for name in ("metrics.txt", "features_herding_sh.csv"):
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()

    @pytest.mark.slow
    def test_safe_herding_features_beat_pixels(self, tmp_path):
        """Test herding-SH + MLR against pixel MLR on the 12x12 pattern classes."""
        data_dir = write_class_dir(tmp_path / "data", structured_pattern_splits(seed=2009))
        out = tmp_path / "out"
        code = main(
            ["classify", "--data-dir", str(data_dir), "--hidden", "8", "--iters", "400",
             "--methods", "pixel_mlr", "herding_sh", "--out", str(out)]
        )  # fmt: skip

        assert code == 0
        metrics = dict(line.split() for line in read_lines(out / "metrics.txt"))
        assert float(metrics["herding_sh"]) >= float(metrics["pixel_mlr"])


def test_generate_pattern_files(tmp_path):
    out = tmp_path / "patterns"

    assert generate_main(["patterns", "--out", str(out), "--sizes", "4", "2", "2"]) == 0
    assert len(list(out.glob("*.txt"))) == 9
    assert read_lines(out / "valid_2.txt")[0] == "2 144"
