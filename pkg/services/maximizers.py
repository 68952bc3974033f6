"""Argmax routines used by herding.

Tie rules, all preserved under positive rescaling of the coefficients:

* per-unit signs prefer +1 on an exact zero pre-activation,
* scans over enumerated states return the lowest canonical index,
* coordinate flips require a strict score increase (the current value is kept).
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from core.config import get_settings
from core.errors import ConfigError, DataError
from models.dataset import Dataset
from models.feature_model import (
    EnumeratedModel,
    FeatureModel,
    JointState,
    RbmModel,
    WeightVector,
    check_weights,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AscentConfig:
    """Coordinate-ascent settings.

    Attributes:
        max_sweeps: Sweep limit; ``None`` runs until a sweep changes nothing
    """

    max_sweeps: int | None = 10

    def __post_init__(self) -> None:
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ConfigError(f"max_sweeps must be >= 1, got {self.max_sweeps}")

    @classmethod
    def from_settings(cls) -> "AscentConfig":
        return cls(max_sweeps=get_settings().max_sweeps)


def rbm_preactivations(model: RbmModel, coeffs: WeightVector, visibles: NDArray) -> NDArray:
    """Hidden pre-activations b_i + sum_j W_ij x_j for each row of ``visibles``."""
    xs = np.atleast_2d(np.asarray(visibles, dtype=np.float64))
    return xs @ model.pairwise(coeffs).T + model.hidden_bias(coeffs)


def argmax_hidden_batch(model: FeatureModel, coeffs: WeightVector, visibles: NDArray) -> NDArray:
    """
    Conditional hidden maximizer for many visible configurations at once.

    Args:
        model: Feature model
        coeffs: Effective coefficients
        visibles: (N, D) spins for an RBM, (N,) visible indices otherwise

    Returns:
        (N, K) int8 spins for an RBM, (N,) hidden indices otherwise
    """
    if isinstance(model, RbmModel):
        if model.K == 0:
            return np.zeros((len(visibles), 0), dtype=np.int8)
        pre = rbm_preactivations(model, coeffs, visibles)
        return np.where(pre >= 0.0, 1, -1).astype(np.int8)
    idx = np.asarray(visibles, dtype=np.int64)
    scores = model.feature_block()[idx] @ coeffs
    return np.argmax(scores, axis=1)


def argmax_hidden(model: FeatureModel, w: NDArray, x: NDArray | int) -> NDArray | int:
    """
    Exact maximizer of the score over hidden configurations for fixed x.

    Args:
        model: Feature model
        w: Coefficients
        x: Visible spin vector (RBM) or visible index (enumerated)

    Returns:
        Hidden spin vector (RBM) or hidden index (enumerated)
    """
    coeffs = check_weights(model, w)
    if isinstance(model, RbmModel):
        x_arr = np.asarray(x)
        if x_arr.shape != (model.D,):
            raise DataError(f"visible vector shape {x_arr.shape} does not match D={model.D}")
        return argmax_hidden_batch(model, coeffs, x_arr[None, :])[0]
    if not 0 <= int(x) < model.num_visible:
        raise DataError(f"visible index {x} out of range")
    return int(argmax_hidden_batch(model, coeffs, np.array([int(x)]))[0])


def argmax_joint_exhaustive(
    model: EnumeratedModel,
    w: NDArray,
    cap: int | None = None,
) -> JointState:
    """Global maximizer of the score; ties go to the lowest joint index."""
    if not isinstance(model, EnumeratedModel):
        raise DataError("exhaustive maximization needs an enumerated model")
    cap = get_settings().exhaustive_cap if cap is None else cap
    if model.joint_count > cap:
        raise DataError(f"{model.joint_count} joint states exceed the exhaustive cap {cap}")
    coeffs = check_weights(model, w)
    return model.state_at(int(np.argmax(model.feature_matrix @ coeffs)))


def _ascend_rbm(
    model: RbmModel,
    coeffs: WeightVector,
    s_init: JointState,
    cfg: AscentConfig,
) -> JointState:
    x = np.array(s_init.visible, dtype=np.float64)
    z = np.array(s_init.hidden, dtype=np.float64)
    a = model.visible_bias(coeffs)
    b = model.hidden_bias(coeffs)
    W = model.pairwise(coeffs)
    WT = np.ascontiguousarray(W.T)

    sweep = 0
    while cfg.max_sweeps is None or sweep < cfg.max_sweeps:
        sweep += 1
        changed = False
        # Flipping unit u changes the score by -2 * s_u * field_u
        for j in range(model.D):
            if x[j] * (a[j] + WT[j] @ z) < 0.0:
                x[j] = -x[j]
                changed = True
        for i in range(model.K):
            if z[i] * (b[i] + W[i] @ x) < 0.0:
                z[i] = -z[i]
                changed = True
        if not changed:
            break
    else:
        logger.debug(f"RBM ascent stopped at the {cfg.max_sweeps}-sweep cap before converging")
    return JointState(visible=x.astype(np.int8), hidden=z.astype(np.int8))


def _ascend_enumerated(
    model: EnumeratedModel,
    coeffs: WeightVector,
    s_init: JointState,
    cfg: AscentConfig,
) -> JointState:
    block = model.feature_block()
    v, h = int(s_init.visible), int(s_init.hidden)

    sweep = 0
    while cfg.max_sweeps is None or sweep < cfg.max_sweeps:
        sweep += 1
        changed = False
        col = block[:, h, :] @ coeffs
        best = int(np.argmax(col))
        if col[best] > col[v]:
            v = best
            changed = True
        row = block[v, :, :] @ coeffs
        best = int(np.argmax(row))
        if row[best] > row[h]:
            h = best
            changed = True
        if not changed:
            break
    return JointState(visible=v, hidden=h)


def ascend_joint(
    model: FeatureModel,
    w: NDArray,
    s_init: JointState,
    cfg: AscentConfig | None = None,
) -> JointState:
    """
    Coordinate-wise ascent on the joint score.

    RBM coordinates are single spins, visible units first then hidden units,
    each in ascending order. For an enumerated model the two coordinates are
    the visible and the hidden variable, each set to its best value with the
    other held fixed. A move is accepted only on strict improvement, so the
    score never decreases.

    Args:
        model: Feature model
        w: Coefficients
        s_init: Starting state
        cfg: Sweep limit

    Returns:
        Final state; 1-move-maximal when the last sweep changed nothing
    """
    coeffs = check_weights(model, w)
    model.check_state(s_init)
    cfg = cfg or AscentConfig.from_settings()
    if isinstance(model, RbmModel):
        return _ascend_rbm(model, coeffs, s_init, cfg)
    return _ascend_enumerated(model, coeffs, s_init, cfg)


def case_scores(
    model: FeatureModel,
    coeffs: WeightVector,
    visibles: NDArray,
    hiddens: NDArray | None = None,
) -> NDArray[np.float64]:
    """Score of each (x_n, z*_n); hidden states are maximized when not given."""
    if hiddens is None:
        hiddens = argmax_hidden_batch(model, coeffs, visibles)
    if isinstance(model, RbmModel):
        xs = np.asarray(visibles, dtype=np.float64)
        zs = np.asarray(hiddens, dtype=np.float64)
        pre = rbm_preactivations(model, coeffs, xs) if model.K else np.zeros((len(xs), 0))
        return xs @ model.visible_bias(coeffs) + np.sum(zs * pre, axis=1)
    rows = np.asarray(visibles, dtype=np.int64) * model.num_hidden + np.asarray(hiddens)
    return model.feature_matrix[rows] @ coeffs


def lowest_energy_case(
    model: FeatureModel,
    w: NDArray,
    data: Dataset,
) -> tuple[int, JointState]:
    """
    Data case with the lowest energy after hidden maximization.

    Returns:
        (case index, joint state (x_n, z*_n)); ties go to the lowest index
    """
    coeffs = check_weights(model, w)
    visibles = data.visibles_for(model)
    return lowest_energy_from(model, coeffs, visibles)


def lowest_energy_from(
    model: FeatureModel,
    coeffs: WeightVector,
    visibles: NDArray,
    hiddens: NDArray | None = None,
) -> tuple[int, JointState]:
    """Same as ``lowest_energy_case`` for prepared visibles and imputed hiddens."""
    if len(visibles) == 0:
        raise DataError("lowest-energy search needs at least one case")
    if hiddens is None:
        hiddens = argmax_hidden_batch(model, coeffs, visibles)
    energies = -case_scores(model, coeffs, visibles, hiddens)
    n = int(np.argmin(energies))
    if isinstance(model, RbmModel):
        state = JointState(
            visible=np.asarray(visibles[n], dtype=np.int8),
            hidden=np.asarray(hiddens[n], dtype=np.int8),
        )
    else:
        state = JointState(visible=int(visibles[n]), hidden=int(hiddens[n]))
    return n, state
