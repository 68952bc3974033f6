"""Writers for trajectories, vectors, pseudo-samples, tables and PGM images.

All numbers are written with full round-trip precision so reruns can be
compared byte for byte.
"""

import csv
import json
import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from PIL import Image

from core.errors import DataError
from core.utils import format_float, format_row
from models.feature_model import EnumeratedModel, FeatureModel, JointState, RbmModel
from models.herd_state import Trajectory

logger = logging.getLogger(__name__)


def _ensure_parent(path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_vector(path: Path, values: NDArray) -> Path:
    """Write ``F`` followed by F values, one per line."""
    path = _ensure_parent(path)
    values = np.asarray(values, dtype=np.float64)
    lines = [str(values.size)] + [format_float(v) for v in values]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_trajectory_csv(path: Path, trajectory: Trajectory, include_gaps: bool = True) -> Path:
    """Columns: t, norm2, norm_inf and one moment-gap column per feature."""
    path = _ensure_parent(path)
    num_features = trajectory.gaps[0].size if trajectory.gaps and include_gaps else 0
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "norm2", "norm_inf"] + [f"gap_{a}" for a in range(num_features)])
        for k, t in enumerate(trajectory.steps):
            row = [str(t), format_float(trajectory.norm2[k]), format_float(trajectory.norm_inf[k])]
            if num_features:
                row += [format_float(g) for g in trajectory.gaps[k]]
            writer.writerow(row)
    return path


def visible_row(model: FeatureModel, state: JointState) -> list[str]:
    """Visible part of a pseudo-sample as text tokens."""
    if isinstance(model, RbmModel):
        return [str(int(v)) for v in np.asarray(state.visible)]
    assert isinstance(model, EnumeratedModel)
    values = model.visible_states[int(state.visible)]
    if np.issubdtype(values.dtype, np.integer):
        return [str(int(v)) for v in values]
    return [format_float(v) for v in values]


def write_sample_stream(path: Path, model: FeatureModel, samples: Sequence[JointState]) -> Path:
    """One row per recorded pseudo-sample holding its visible part."""
    path = _ensure_parent(path)
    path.write_text("".join(" ".join(visible_row(model, s)) + "\n" for s in samples))
    return path


def write_orbit_csv(path: Path, steps: Sequence[int], weights: Sequence[NDArray]) -> Path:
    """Weight orbit: t followed by every weight coordinate."""
    path = _ensure_parent(path)
    num_features = weights[0].size if weights else 0
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"w_{a}" for a in range(num_features)])
        for t, w in zip(steps, weights, strict=True):
            writer.writerow([str(t)] + [format_float(v) for v in w])
    return path


def write_surface_csv(
    path: Path,
    grid_a: NDArray,
    grid_b: NDArray,
    values: NDArray,
) -> Path:
    """Objective surface: w_0, w_1, value per grid point."""
    path = _ensure_parent(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["w_0", "w_1", "tipi"])
        for i, wa in enumerate(grid_a):
            for k, wb in enumerate(grid_b):
                writer.writerow([format_float(wa), format_float(wb), format_float(values[i, k])])
    return path


def scale_to_gray(values: NDArray) -> NDArray[np.uint8]:
    """Linear min-max scaling to 0..255; a constant image becomes mid-gray."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.full(values.shape, 128, dtype=np.uint8)
    return np.rint((values - lo) / (hi - lo) * 255.0).astype(np.uint8)


def write_pgm(path: Path, values: NDArray) -> Path:
    """Write a 2-D array as an 8-bit binary (P5) PGM image."""
    path = _ensure_parent(path)
    values = np.asarray(values)
    if values.ndim != 2:
        raise DataError("PGM images must be two-dimensional")
    Image.fromarray(scale_to_gray(values)).save(path, format="PPM")
    return path


def export_rate_filters(
    out_dir: Path,
    model: RbmModel,
    rates: NDArray,
    height: int,
    width: int,
    prefix: str = "rate_filter",
) -> list[Path]:
    """
    Write one PGM per hidden unit from its pairwise rate block.

    Args:
        out_dir: Output directory
        model: RBM whose pairwise block is sliced
        rates: Length-F rate vector
        height: Image height
        width: Image width (height * width must equal D)
        prefix: File name prefix

    Returns:
        Written file paths in hidden-unit order
    """
    if height * width != model.D:
        raise DataError(f"filter dims {height}x{width} do not cover D={model.D}")
    block = model.pairwise(np.asarray(rates, dtype=np.float64))
    out_dir = Path(out_dir)
    paths = [
        write_pgm(out_dir / f"{prefix}_{i:04d}.pgm", block[i].reshape(height, width))
        for i in range(model.K)
    ]
    logger.info(f"wrote {len(paths)} rate filters to {out_dir}")
    return paths


def write_feature_table_csv(
    path: Path,
    features: NDArray,
    class_labels: Sequence[int],
    labels: NDArray | None,
    case_ids: Sequence[str] | None = None,
) -> Path:
    """Columns: case_id, label, one energy feature per class."""
    path = _ensure_parent(path)
    n = features.shape[0]
    ids = list(case_ids) if case_ids is not None else [str(k) for k in range(n)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["case_id", "label"] + [f"energy_class_{c}" for c in class_labels])
        for k in range(n):
            label = "" if labels is None else str(int(labels[k]))
            writer.writerow([ids[k], label] + [format_float(v) for v in features[k]])
    return path


def write_metrics(path: Path, metrics: Mapping[str, float]) -> Path:
    """Plain-text report, one ``method accuracy`` line per method."""
    path = _ensure_parent(path)
    path.write_text("".join(f"{name} {format_float(value)}\n" for name, value in metrics.items()))
    return path


def write_json(path: Path, payload: Mapping) -> Path:
    path = _ensure_parent(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


def write_spin_dataset(path: Path, cases: NDArray) -> Path:
    """Write cases in the spin dataset format."""
    path = _ensure_parent(path)
    cases = np.atleast_2d(np.asarray(cases, dtype=np.int64))
    lines = [f"{cases.shape[0]} {cases.shape[1]}"]
    lines += [" ".join(str(v) for v in row) for row in cases]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_enumerated_model(path: Path, model: EnumeratedModel) -> Path:
    """Write a model in the enumerated text format."""
    path = _ensure_parent(path)
    header = (
        f"{model.num_visible} {model.num_hidden} {model.num_features} {model.visible_dim}"
    )
    lines = [header]
    lines += [format_row(row) for row in model.visible_states.astype(np.float64)]
    lines += [format_row(row) for row in model.feature_matrix]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_value_dataset(path: Path, cases: NDArray) -> Path:
    """Write real-valued cases as an ``N D`` table at full precision."""
    path = _ensure_parent(path)
    cases = np.atleast_2d(np.asarray(cases, dtype=np.float64))
    lines = [f"{cases.shape[0]} {cases.shape[1]}"] + [format_row(row) for row in cases]
    path.write_text("\n".join(lines) + "\n")
    return path
