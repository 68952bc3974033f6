"""Parsers for the plain-text dataset, model and vector formats.

Spin dataset:       first line ``N D``, then N rows of D tokens in {-1, +1}
                    (or {0, 1} when loaded with ``binary=True``).
Grayscale dataset:  first line ``N D maxval``, then N rows of integers,
                    binarized on load.
Enumerated model:   first line ``V H F D``, then V rows of D visible values,
                    then V * H rows of F feature values (visible-major).
Vector file:        first line ``F``, then F values (weights, rates, offsets).
"""

import logging
import re
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from core.errors import DataError
from core.utils import to_spins
from models.dataset import Dataset, concat_datasets
from models.feature_model import EnumeratedModel

logger = logging.getLogger(__name__)


def binarize_grayscale(
    pixels: NDArray,
    threshold: float = 0.2,
    maxval: float = 256,
) -> NDArray[np.int8]:
    """
    Map gray levels to spins: +1 iff pixel / maxval - threshold > 0, else -1.

    Args:
        pixels: Integer gray levels in [1, maxval]
        threshold: Fraction of maxval a pixel must strictly exceed
        maxval: Divisor (gray-level range)

    Returns:
        int8 spins with the shape of ``pixels``
    """
    if not maxval > 0:
        raise DataError(f"maxval must be positive, got {maxval}")
    ratio = np.asarray(pixels, dtype=np.float64) / float(maxval)
    return np.where(ratio - threshold > 0.0, 1, -1).astype(np.int8)


def _read_tokens(path: Path) -> list[list[str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    lines = [line.split() for line in path.read_text().splitlines()]
    return [tokens for tokens in lines if tokens]


def _parse_header(tokens: list[str], path: Path, expected: int) -> list[int]:
    if len(tokens) != expected:
        raise DataError(f"{path}: header must have {expected} fields, got {len(tokens)}")
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise DataError(f"{path}: malformed header {' '.join(tokens)}") from e


def _parse_rows(rows: list[list[str]], n: int, d: int, path: Path, dtype: type) -> NDArray:
    if len(rows) != n:
        raise DataError(f"{path}: expected {n} rows, found {len(rows)}")
    if any(len(r) != d for r in rows):
        raise DataError(f"{path}: every row must have {d} entries")
    try:
        return np.array([[dtype(t) for t in r] for r in rows])
    except ValueError as e:
        raise DataError(f"{path}: non-numeric entry") from e


def load_spin_dataset(path: Path, binary: bool = False) -> Dataset:
    """Load a spin dataset; ``binary`` converts {0, 1} input to spins."""
    lines = _read_tokens(path)
    if not lines:
        raise DataError(f"{path}: empty file")
    n, d = _parse_header(lines[0], path, 2)
    values = _parse_rows(lines[1:], n, d, path, int)
    return Dataset(cases=to_spins(values.reshape(n, d), from_binary=binary))


def load_grayscale_dataset(path: Path, threshold: float = 0.2) -> Dataset:
    """Load a grayscale dataset and binarize it with the header's maxval."""
    lines = _read_tokens(path)
    if not lines:
        raise DataError(f"{path}: empty file")
    n, d, maxval = _parse_header(lines[0], path, 3)
    values = _parse_rows(lines[1:], n, d, path, int)
    logger.debug(f"binarizing {n}x{d} gray levels from {path}")
    return Dataset(cases=binarize_grayscale(values.reshape(n, d), threshold, maxval))


def load_value_dataset(path: Path) -> Dataset:
    """Load an ``N D`` table of arbitrary real values (cases of an enumerated model)."""
    lines = _read_tokens(path)
    if not lines:
        raise DataError(f"{path}: empty file")
    n, d = _parse_header(lines[0], path, 2)
    return Dataset(cases=_parse_rows(lines[1:], n, d, path, float).reshape(n, d))


def load_dataset(
    path: Path,
    binary: bool = False,
    threshold: float = 0.2,
    spins: bool = True,
) -> Dataset:
    """Load a dataset, detecting the grayscale format from the header length.

    With ``spins=False`` an ``N D`` file is read as real values.
    """
    lines = _read_tokens(path)
    if not lines:
        raise DataError(f"{path}: empty file")
    if len(lines[0]) == 3:
        return load_grayscale_dataset(path, threshold)
    if not spins:
        return load_value_dataset(path)
    return load_spin_dataset(path, binary)


def load_enumerated_model(path: Path) -> EnumeratedModel:
    """Load an enumerated model table; hidden states are numbered 0..H-1."""
    lines = _read_tokens(path)
    if not lines:
        raise DataError(f"{path}: empty file")
    v, h, f, d = _parse_header(lines[0], path, 4)
    visible = _parse_rows(lines[1 : 1 + v], v, d, path, float)
    features = _parse_rows(lines[1 + v :], v * h, f, path, float)
    return EnumeratedModel(
        visible_states=visible.reshape(v, d),
        hidden_states=np.arange(h)[:, None],
        feature_matrix=features.reshape(v * h, f),
    )


def read_vector(path: Path, length: int | None = None) -> NDArray[np.float64]:
    """Read a vector file, optionally checking its length."""
    lines = _read_tokens(path)
    if not lines:
        raise DataError(f"{path}: empty file")
    (f,) = _parse_header(lines[0], path, 1)
    values = [t for row in lines[1:] for t in row]
    if len(values) != f:
        raise DataError(f"{path}: header says {f} values, found {len(values)}")
    if length is not None and f != length:
        raise DataError(f"{path}: vector length {f} does not match {length} features")
    try:
        return np.array([float(t) for t in values])
    except ValueError as e:
        raise DataError(f"{path}: non-numeric value") from e


SPLIT_NAMES = ("train", "valid", "test")
_SPLIT_FILE = re.compile(r"^(train|valid|test)_(-?\d+)\.txt$")


def load_class_splits(
    data_dir: Path,
    binary: bool = False,
    threshold: float = 0.2,
) -> dict[str, Dataset]:
    """
    Load ``<split>_<label>.txt`` files into labelled train/valid/test sets.

    Cases are stacked in ascending label order within each split.

    Raises:
        DataError: If the directory is missing, a split is absent, or a label
            appearing in validation or test data has no training file
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")
    files: dict[str, dict[int, Path]] = {name: {} for name in SPLIT_NAMES}
    for path in sorted(data_dir.iterdir()):
        match = _SPLIT_FILE.match(path.name)
        if match:
            files[match.group(1)][int(match.group(2))] = path

    for name in SPLIT_NAMES:
        if not files[name]:
            raise DataError(f"{data_dir}: no {name}_<label>.txt files")
    for name in ("valid", "test"):
        missing = sorted(set(files[name]) - set(files["train"]))
        if missing:
            raise DataError(f"class {missing[0]} has no training cases")

    splits: dict[str, Dataset] = {}
    for name in SPLIT_NAMES:
        parts = []
        for label in sorted(files[name]):
            ds = load_dataset(files[name][label], binary=binary, threshold=threshold)
            parts.append(Dataset(cases=ds.cases, labels=np.full(ds.num_cases, label)))
        splits[name] = concat_datasets(parts)
        logger.info(f"loaded {name}: {splits[name].num_cases} cases, {len(parts)} classes")
    return splits
