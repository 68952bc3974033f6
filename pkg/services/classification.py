"""Energy-feature classification pipeline.

Each class gets its own herding chain. During an evaluation window the chain's
current weights give energies for the class's training cases and for every
evaluation case; the training energies standardize the evaluation energies
(Z-scores), which are then averaged online over the window.
"""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from core.config import get_settings
from core.errors import ConfigError, DataError, InvariantViolation
from models.dataset import Dataset
from models.feature_model import FeatureModel, WeightVector, check_weights
from models.herd_state import TransformParams
from services.herding import ChainConfig, HerdingEngine
from services.maximizers import case_scores

logger = logging.getLogger(__name__)

# Spreads this small relative to the energies are rounding noise and count as zero
SPREAD_RTOL = 1e-6


@dataclass(frozen=True)
class EnergyStandardizer:
    """Mean and population standard deviation of one iteration's training energies."""

    mu_trn: float
    sigma_trn: float

    @classmethod
    def from_energies(cls, energies: NDArray) -> "EnergyStandardizer":
        energies = np.asarray(energies, dtype=np.float64)
        if energies.size == 0:
            raise DataError("standardization needs at least one training energy")
        return cls(mu_trn=float(energies.mean()), sigma_trn=float(energies.std(ddof=0)))


def standardize(energies: NDArray, std: EnergyStandardizer) -> NDArray[np.float64]:
    """(E - mu) / sigma elementwise."""
    if not std.sigma_trn > 0:
        raise DataError("cannot standardize with zero training spread")
    return (np.asarray(energies, dtype=np.float64) - std.mu_trn) / std.sigma_trn


def case_energies(model: FeatureModel, coeffs: WeightVector, visibles: NDArray) -> NDArray:
    """Energies -max_z c.g(x_n, z) of prepared visible configurations."""
    return -case_scores(model, coeffs, visibles)


def case_energy(
    model: FeatureModel,
    w: NDArray,
    x: NDArray | int,
    transform: TransformParams | None = None,
) -> float:
    """
    Energy of one visible configuration after hidden maximization.

    Args:
        model: Feature model
        w: Chain weights
        x: Visible spins (RBM) or visible index (enumerated)
        transform: Applied to obtain effective coefficients when given

    Returns:
        -score(x, argmax_hidden(x))
    """
    coeffs = check_weights(model, w)
    if transform is not None:
        coeffs = transform.effective(coeffs)
    visibles = np.asarray([x])
    return float(case_energies(model, coeffs, visibles)[0])


@dataclass
class ClassPipelineResult:
    """Averaged standardized energies of all evaluation cases under one class chain."""

    label: int
    averaged: NDArray[np.float64]
    iterations: int
    skipped: int
    train_zscore_moments: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class EnergyFeatureTable:
    """Per evaluation case, per class averaged standardized energy."""

    class_labels: list[int]
    features: NDArray[np.float64]
    labels: NDArray[np.int64] | None
    iterations: list[int]

    @property
    def shape(self) -> tuple[int, int]:
        return self.features.shape  # type: ignore[return-value]

    def rows(self, start: int, stop: int) -> "EnergyFeatureTable":
        labels = None if self.labels is None else self.labels[start:stop]
        return EnergyFeatureTable(
            class_labels=self.class_labels,
            features=self.features[start:stop],
            labels=labels,
            iterations=self.iterations,
        )


def default_window(total_iters: int) -> tuple[int, int]:
    """Second half of the run, inclusive."""
    return total_iters // 2 + 1, total_iters


def run_class_pipeline(
    model: FeatureModel,
    class_data: Dataset,
    eval_cases: Dataset,
    chain_cfg: ChainConfig,
    total_iters: int = 2000,
    eval_window: tuple[int, int] | None = None,
    label: int = 0,
    w0: NDArray | None = None,
) -> ClassPipelineResult:
    """
    Run one class chain and average the standardized evaluation energies.

    Energies at iteration t use the weights after that iteration's update.

    Args:
        model: Feature model shared by all classes
        class_data: Training cases of this class (drive the chain, standardize)
        eval_cases: Cases to score (validation and test, all classes)
        chain_cfg: Chain configuration
        total_iters: Herding iterations
        eval_window: Inclusive (first, last) iterations folded into the average
        label: Class label, used for logging and the result
        w0: Initial weights (default: seeded)

    Returns:
        Averaged Z-scores of the evaluation cases
    """
    first, last = eval_window or default_window(total_iters)
    if not 1 <= first <= last <= total_iters:
        raise ConfigError(f"evaluation window ({first}, {last}) outside [1, {total_iters}]")

    train_visibles = class_data.visibles_for(model)
    eval_visibles = eval_cases.visibles_for(model)
    transform = chain_cfg.transform

    averaged = np.zeros(len(eval_visibles))
    moments: list[tuple[float, float]] = []
    count = 0
    skipped = 0

    with HerdingEngine(model, class_data, chain_cfg) as engine:
        state = engine.init_chain(w0)
        for t in range(1, last + 1):
            state = engine.step(state)
            if t < first:
                continue
            coeffs = transform.effective(state.w)
            train_energies = case_energies(model, coeffs, train_visibles)
            std = EnergyStandardizer.from_energies(train_energies)
            if not std.sigma_trn > SPREAD_RTOL * max(1.0, float(np.abs(train_energies).max())):
                logger.warning(f"class {label}: zero training energy spread at t={t}, skipped")
                skipped += 1
                continue
            train_z = standardize(train_energies, std)
            moments.append((float(train_z.mean()), float(train_z.var())))
            eval_z = standardize(case_energies(model, coeffs, eval_visibles), std)
            count += 1
            averaged += (eval_z - averaged) / count

    logger.info(f"class {label}: averaged {count} iterations ({skipped} skipped)")
    return ClassPipelineResult(
        label=label,
        averaged=averaged,
        iterations=count,
        skipped=skipped,
        train_zscore_moments=moments,
    )


def build_feature_table(
    model: FeatureModel,
    train: Dataset,
    eval_cases: Dataset,
    chain_cfg: ChainConfig,
    total_iters: int = 2000,
    eval_window: tuple[int, int] | None = None,
    threads: int | None = None,
) -> tuple[EnergyFeatureTable, list[ClassPipelineResult]]:
    """
    Run every class pipeline and assemble the feature table.

    Class chains are independent and may run in parallel; columns are merged
    in ascending label order.
    """
    if train.labels is None:
        raise DataError("training data must be labelled")
    class_labels = [int(c) for c in np.unique(train.labels)]
    if len(class_labels) < 2:
        raise DataError("classification needs at least two classes")

    def _run(label: int) -> ClassPipelineResult:
        return run_class_pipeline(
            model,
            train.for_class(label),
            eval_cases,
            chain_cfg,
            total_iters=total_iters,
            eval_window=eval_window,
            label=label,
        )

    workers = threads or get_settings().herd_threads
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run, class_labels))
    else:
        results = [_run(label) for label in class_labels]

    table = EnergyFeatureTable(
        class_labels=class_labels,
        features=np.column_stack([r.averaged for r in results]),
        labels=eval_cases.labels,
        iterations=[r.iterations for r in results],
    )
    return table, results


def split_rows(table: EnergyFeatureTable, sizes: Sequence[int]) -> list[EnergyFeatureTable]:
    """Split a feature table into consecutive row blocks."""
    out = []
    start = 0
    for size in sizes:
        out.append(table.rows(start, start + size))
        start += size
    if start != table.features.shape[0]:
        raise DataError("split sizes do not cover the feature table")
    return out


def verify_zscore_moments(results: Sequence[ClassPipelineResult], tol: float = 1e-12) -> None:
    """
    Check that every class's training Z-scores had mean 0 and variance 1.

    Raises:
        InvariantViolation: On the first iteration outside ``tol``
    """
    for result in results:
        for k, (mean, var) in enumerate(result.train_zscore_moments):
            if abs(mean) > tol or abs(var - 1.0) > tol:
                raise InvariantViolation(
                    f"class {result.label}: training Z-scores at window position {k} have "
                    f"mean {mean:.3e}, variance {var:.12f}"
                )
