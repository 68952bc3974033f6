"""Synthetic systems and datasets.

* The sin/cos demo system: one visible variable on a unit-step grid over
  [-pi, pi], features (sin x, cos x), every grid point observed once.
* Seeded random and prototype-based spin datasets for RBM experiments.
* A three-class set of 12x12 spin patterns whose classes differ only in their
  pairwise correlation structure (row stripes, column stripes, 2x2 blocks).
"""

import logging

import numpy as np
from numpy.typing import NDArray

from core.config import get_settings
from core.errors import ConfigError, DataError
from models.dataset import Dataset, concat_datasets
from models.feature_model import EnumeratedModel

logger = logging.getLogger(__name__)

PATTERN_CLASSES = ("row_stripes", "column_stripes", "blocks")


def sin_cos_grid(step: float = 1.0) -> NDArray[np.float64]:
    """Grid -pi + k * step for every k with the point still <= pi."""
    if not step > 0:
        raise ConfigError(f"grid step must be positive, got {step}")
    count = int(np.floor(2 * np.pi / step)) + 1
    grid = -np.pi + step * np.arange(count)
    return grid[grid <= np.pi]


def build_sin_cos_system(step: float = 1.0) -> tuple[EnumeratedModel, Dataset]:
    """
    Fully observed two-feature system over a grid on [-pi, pi].

    Args:
        step: Grid spacing (the default gives 7 points, the last at 2.858...)

    Returns:
        (model with features (sin x, cos x), dataset holding every grid point once)
    """
    grid = sin_cos_grid(step)
    if grid.size < 3:
        raise ConfigError(f"grid needs at least 3 points, got {grid.size}")
    model = EnumeratedModel(
        visible_states=grid[:, None],
        hidden_states=np.zeros((1, 0)),
        feature_matrix=np.column_stack([np.sin(grid), np.cos(grid)]),
    )
    return model, Dataset(cases=grid[:, None])


def grid_means(model: EnumeratedModel) -> NDArray[np.float64]:
    """Feature means under the uniform distribution over visible states."""
    return model.feature_matrix.sum(axis=0) / model.joint_count


def random_spin_cases(
    num_cases: int,
    dim: int,
    seed: int | None = None,
    distinct: bool = True,
) -> Dataset:
    """
    Uniform random spin cases.

    Args:
        num_cases: N
        dim: D
        seed: Generator seed (default: settings.default_seed)
        distinct: Redraw duplicates so every case is unique

    Returns:
        Unlabelled spin dataset
    """
    if distinct and num_cases > 2**dim:
        raise DataError(f"cannot draw {num_cases} distinct cases of dimension {dim}")
    rng = np.random.default_rng(get_settings().default_seed if seed is None else seed)
    rows: list[NDArray] = []
    seen: set[bytes] = set()
    while len(rows) < num_cases:
        row = rng.choice(np.array([-1, 1], dtype=np.int8), size=dim)
        key = row.tobytes()
        if distinct and key in seen:
            continue
        seen.add(key)
        rows.append(row)
    return Dataset(cases=np.stack(rows))


def prototype_spin_cases(
    num_cases: int,
    dim: int,
    num_prototypes: int = 4,
    flip_prob: float = 0.1,
    seed: int | None = None,
) -> Dataset:
    """Noisy copies of a few random prototypes; gives data with hidden structure."""
    if not 0.0 <= flip_prob <= 0.5:
        raise ConfigError(f"flip_prob must be in [0, 0.5], got {flip_prob}")
    rng = np.random.default_rng(get_settings().default_seed if seed is None else seed)
    prototypes = rng.choice(np.array([-1, 1], dtype=np.int8), size=(num_prototypes, dim))
    assignment = np.arange(num_cases) % num_prototypes
    flips = np.where(rng.random((num_cases, dim)) < flip_prob, -1, 1).astype(np.int8)
    return Dataset(cases=prototypes[assignment] * flips)


def _pattern(kind: str, side: int, rng: np.random.Generator) -> NDArray[np.int8]:
    if kind == "row_stripes":
        return np.repeat(rng.choice([-1, 1], size=(side, 1)), side, axis=1)
    if kind == "column_stripes":
        return np.repeat(rng.choice([-1, 1], size=(1, side)), side, axis=0)
    if kind == "blocks":
        if side % 2:
            raise ConfigError("block patterns need an even side length")
        coarse = rng.choice([-1, 1], size=(side // 2, side // 2))
        return np.kron(coarse, np.ones((2, 2), dtype=np.int64))
    raise ConfigError(f"unknown pattern class {kind!r}")


def structured_pattern_class(
    kind: str,
    num_cases: int,
    side: int = 12,
    noise: float = 0.05,
    seed: int = 0,
    label: int = 0,
) -> Dataset:
    """
    One class of structured spin images, flattened row-major.

    Every pixel has mean zero, so a linear classifier on raw pixels has little
    to work with; the classes differ in which pixels are correlated.
    """
    if not 0.0 <= noise <= 0.5:
        raise ConfigError(f"noise must be in [0, 0.5], got {noise}")
    rng = np.random.default_rng(seed)
    images = np.stack([_pattern(kind, side, rng) for _ in range(num_cases)])
    flips = np.where(rng.random(images.shape) < noise, -1, 1)
    cases = (images * flips).reshape(num_cases, side * side).astype(np.int8)
    return Dataset(cases=cases, labels=np.full(num_cases, label, dtype=np.int64))


def structured_pattern_splits(
    sizes: tuple[int, int, int] = (100, 50, 50),
    side: int = 12,
    noise: float = 0.05,
    seed: int | None = None,
) -> tuple[Dataset, Dataset, Dataset]:
    """
    Train, validation and test sets of the three pattern classes.

    Each split holds ``sizes[k]`` cases per class, ordered by class label.
    """
    base = get_settings().default_seed if seed is None else seed
    splits: list[list[Dataset]] = [[], [], []]
    for label, kind in enumerate(PATTERN_CLASSES):
        full = structured_pattern_class(
            kind, sum(sizes), side=side, noise=noise, seed=base + label, label=label
        )
        start = 0
        for k, size in enumerate(sizes):
            splits[k].append(full.subset(np.arange(start, start + size)))
            start += size
    train, valid, test = (concat_datasets(parts) for parts in splits)
    logger.info(
        f"generated {len(PATTERN_CLASSES)} pattern classes: "
        f"{train.num_cases}/{valid.num_cases}/{test.num_cases} train/valid/test"
    )
    return train, valid, test
