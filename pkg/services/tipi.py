"""Zero-temperature objective (Tipi function), its gradient and bounds.

Everything here works on enumerated models, where both maxima of the
objective are exact. The finite-temperature log-likelihood is provided for
checking the zero-temperature limit.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from core.config import get_settings
from core.errors import ConfigError, DataError
from models.dataset import Dataset
from models.feature_model import EnumeratedModel, FeatureModel, RbmModel, check_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundDiagnostics:
    """Gradient bound and recurrence radii of a herding run.

    Attributes:
        grad_bound_B: Upper bound on the 2-norm of the objective's gradient
        recurrence_radius_R: Empirical radius beyond which the norm did not grow
        safe_radius_Rprime: R plus one worst-case step
    """

    grad_bound_B: float
    recurrence_radius_R: float
    safe_radius_Rprime: float


def _require_enumerated(model: FeatureModel) -> EnumeratedModel:
    if not isinstance(model, EnumeratedModel):
        raise DataError("the Tipi objective is evaluated on enumerated models only")
    cap = get_settings().exhaustive_cap
    if model.joint_count > cap:
        raise DataError(f"{model.joint_count} joint states exceed the exhaustive cap {cap}")
    return model


def _case_score_table(model: EnumeratedModel, w: NDArray, data: Dataset) -> NDArray:
    """(N, H) scores of every hidden completion of every data case."""
    v_idx = data.visibles_for(model)
    return model.feature_block()[v_idx] @ w


def tipi_value(model: FeatureModel, w: NDArray, data: Dataset) -> float:
    """
    Zero-temperature objective.

    (1/N) sum_n max_z w.g(x_n, z) - max_s w.g(s)

    Args:
        model: Enumerated model
        w: Weights
        data: Observed cases

    Returns:
        Objective value (never positive)
    """
    model = _require_enumerated(model)
    w = check_weights(model, w)
    data_term = _case_score_table(model, w, data).max(axis=1).sum() / data.num_cases
    return float(data_term - (model.feature_matrix @ w).max())


def tipi_gradient(model: FeatureModel, w: NDArray, data: Dataset) -> NDArray[np.float64]:
    """Gradient of the canonically tie-broken linear face at w."""
    model = _require_enumerated(model)
    w = check_weights(model, w)
    v_idx = data.visibles_for(model)
    h_idx = np.argmax(model.feature_block()[v_idx] @ w, axis=1)
    rows = v_idx * model.num_hidden + h_idx
    driving = model.feature_matrix[rows].sum(axis=0) / data.num_cases
    s_star = int(np.argmax(model.feature_matrix @ w))
    return driving - model.feature_matrix[s_star]


def log_partition(model: FeatureModel, w: NDArray, T: float = 1.0) -> float:
    """log sum_s exp(w.g(s) / T)."""
    if not T > 0:
        raise ConfigError(f"temperature must be positive, got {T}")
    model = _require_enumerated(model)
    w = check_weights(model, w)
    return float(logsumexp((model.feature_matrix @ w) / T))


def temperature_loglik(model: FeatureModel, w: NDArray, data: Dataset, T: float) -> float:
    """
    Temperature-scaled log-likelihood T * l(w / T) of a partially observed model.

    Both log-sum-exps are max-shifted, so small temperatures stay finite.
    """
    if not T > 0:
        raise ConfigError(f"temperature must be positive, got {T}")
    model = _require_enumerated(model)
    w = check_weights(model, w)
    case_terms = logsumexp(_case_score_table(model, w, data) / T, axis=1)
    return float(T * (case_terms.sum() / data.num_cases - log_partition(model, w, T)))


def temperature_gap_bound(model: EnumeratedModel, T: float) -> float:
    """Upper bound on |l_T - l_0| from the log-sum-exp sandwich."""
    return T * max(np.log(model.joint_count), np.log(model.num_hidden))


def gradient_norm_bound(model: FeatureModel) -> float:
    """
    Bound B on the gradient 2-norm from the per-feature value ranges.

    Every gradient component is a difference of two values inside the range of
    its feature, hence bounded by that range.
    """
    if isinstance(model, RbmModel):
        return float(2.0 * np.sqrt(model.num_features))
    fm = model.feature_matrix
    ranges = fm.max(axis=0) - fm.min(axis=0)
    return float(np.sqrt(np.sum(ranges**2)))


def bound_diagnostics(
    model: FeatureModel,
    norms: list[float] | NDArray,
    eta: float = 1.0,
    burn_in: float = 0.5,
) -> BoundDiagnostics:
    """
    Estimate the recurrence radius from a recorded weight-norm series.

    Args:
        model: Feature model
        norms: Recorded ||w_t||_2 values in time order
        eta: Stepsize of the run (scales the one-step bound)
        burn_in: Fraction of the series ignored when estimating R

    Returns:
        Bound diagnostics with R taken as the largest norm after burn-in
    """
    series = np.asarray(norms, dtype=np.float64)
    if series.size == 0:
        raise DataError("no recorded weight norms")
    start = min(int(burn_in * series.size), series.size - 1)
    B = gradient_norm_bound(model)
    R = float(series[start:].max())
    logger.info(f"bound diagnostics: B={B:.6g} R={R:.6g} R'={R + eta * B:.6g}")
    return BoundDiagnostics(grad_bound_B=B, recurrence_radius_R=R, safe_radius_Rprime=R + eta * B)


def tipi_surface(
    model: FeatureModel,
    data: Dataset,
    grid_a: NDArray,
    grid_b: NDArray,
    base: NDArray | None = None,
    axes: tuple[int, int] = (0, 1),
) -> NDArray[np.float64]:
    """
    Objective values over a plane spanned by two weight coordinates.

    Returns:
        (len(grid_a), len(grid_b)) array
    """
    w = np.zeros(model.num_features) if base is None else np.array(base, dtype=np.float64)
    out = np.empty((len(grid_a), len(grid_b)))
    for i, wa in enumerate(grid_a):
        for k, wb in enumerate(grid_b):
            w[axes[0]] = wa
            w[axes[1]] = wb
            out[i, k] = tipi_value(model, w, data)
    return out
