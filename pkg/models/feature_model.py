"""Feature families, joint states and score evaluation.

Two model families share one interface:

* ``EnumeratedModel`` stores the feature value of every joint state in a table
  whose rows follow the visible-major order ``j = v * H + h``.
* ``RbmModel`` computes spin features on the fly with the fixed layout
  ``[visible biases | hidden biases | pairwise z_i * x_j, hidden-major]``.

Energy is the negative score: ``energy(s) = -sum_a w_a g_a(s)``.
"""

from dataclasses import dataclass, field
from typing import TypeAlias

import numpy as np
from numpy.typing import NDArray

from core.config import get_settings
from core.errors import DataError
from core.utils import spin_product_states

WeightVector: TypeAlias = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class JointState:
    """Pseudo-sample s = (x, z).

    For an ``RbmModel`` both parts are int8 spin vectors; for an
    ``EnumeratedModel`` both parts are integer indices.
    """

    visible: NDArray[np.int8] | int
    hidden: NDArray[np.int8] | int

    def key(self) -> tuple:
        """Hashable, exact representation used for comparisons."""
        if isinstance(self.visible, np.ndarray):
            return (tuple(int(v) for v in self.visible), tuple(int(h) for h in self.hidden))
        return (int(self.visible), int(self.hidden))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JointState):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


@dataclass(frozen=True, eq=False)
class EnumeratedModel:
    """Model over an explicitly enumerated joint state space.

    Attributes:
        visible_states: (V, Dv) array; row v describes visible configuration v
        hidden_states: (H, Dh) array; a fully observed model has H = 1, Dh = 0
        feature_matrix: (V * H, F) array of feature values, visible-major rows
    """

    visible_states: NDArray
    hidden_states: NDArray
    feature_matrix: NDArray[np.float64]
    _visible_lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        vis = np.asarray(self.visible_states)
        if vis.ndim == 1:
            vis = vis[:, None]
        hid = np.asarray(self.hidden_states)
        if hid.ndim == 1:
            hid = hid[:, None]
        fm = np.asarray(self.feature_matrix, dtype=np.float64)
        if fm.ndim != 2:
            raise DataError("feature_matrix must be two-dimensional")
        if fm.shape[0] != vis.shape[0] * hid.shape[0]:
            raise DataError(
                f"feature_matrix has {fm.shape[0]} rows, expected "
                f"{vis.shape[0]} * {hid.shape[0]}"
            )
        if not np.isfinite(fm).all():
            raise DataError("feature values must be finite")
        object.__setattr__(self, "visible_states", vis)
        object.__setattr__(self, "hidden_states", hid)
        object.__setattr__(self, "feature_matrix", fm)
        lookup = {tuple(row.tolist()): v for v, row in enumerate(vis)}
        object.__setattr__(self, "_visible_lookup", lookup)

    @property
    def num_visible(self) -> int:
        return self.visible_states.shape[0]

    @property
    def num_hidden(self) -> int:
        return self.hidden_states.shape[0]

    @property
    def num_features(self) -> int:
        return self.feature_matrix.shape[1]

    @property
    def joint_count(self) -> int:
        return self.feature_matrix.shape[0]

    @property
    def visible_dim(self) -> int:
        return self.visible_states.shape[1]

    @property
    def fully_observed(self) -> bool:
        return self.num_hidden == 1

    def feature_block(self) -> NDArray[np.float64]:
        """Feature table reshaped to (V, H, F)."""
        return self.feature_matrix.reshape(self.num_visible, self.num_hidden, self.num_features)

    def joint_index(self, state: JointState) -> int:
        self.check_state(state)
        return int(state.visible) * self.num_hidden + int(state.hidden)

    def state_at(self, joint_index: int) -> JointState:
        v, h = divmod(int(joint_index), self.num_hidden)
        return JointState(visible=v, hidden=h)

    def check_state(self, state: JointState) -> None:
        if isinstance(state.visible, np.ndarray) or isinstance(state.hidden, np.ndarray):
            raise DataError("enumerated states are (visible index, hidden index) pairs")
        if not 0 <= int(state.visible) < self.num_visible:
            raise DataError(f"visible index {state.visible} out of range")
        if not 0 <= int(state.hidden) < self.num_hidden:
            raise DataError(f"hidden index {state.hidden} out of range")

    def visible_indices(self, cases: NDArray) -> NDArray[np.int64]:
        """Map data rows to visible-state indices.

        Raises:
            DataError: If a row matches no visible configuration
        """
        rows = np.asarray(cases)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.shape[1] != self.visible_dim:
            raise DataError(
                f"case dimension {rows.shape[1]} does not match "
                f"visible dimension {self.visible_dim}"
            )
        out = np.empty(rows.shape[0], dtype=np.int64)
        for n, row in enumerate(rows):
            v = self._visible_lookup.get(tuple(row.tolist()))
            if v is None:
                raise DataError(f"case {n} is not a visible configuration of the model")
            out[n] = v
        return out


@dataclass(frozen=True)
class RbmModel:
    """Restricted Boltzmann machine over spins in {-1, +1}.

    Attributes:
        D: Number of visible units
        K: Number of hidden units (0 gives a fully observed model)
    """

    D: int
    K: int

    def __post_init__(self) -> None:
        if self.D < 1 or self.K < 0:
            raise DataError(f"invalid RBM shape D={self.D}, K={self.K}")

    @property
    def num_features(self) -> int:
        return self.D + self.K + self.D * self.K

    @property
    def fully_observed(self) -> bool:
        return self.K == 0

    @property
    def visible_dim(self) -> int:
        return self.D

    def hidden_bias_indices(self) -> NDArray[np.int64]:
        return np.arange(self.D, self.D + self.K)

    def visible_bias(self, w: WeightVector) -> NDArray[np.float64]:
        return w[: self.D]

    def hidden_bias(self, w: WeightVector) -> NDArray[np.float64]:
        return w[self.D : self.D + self.K]

    def pairwise(self, w: WeightVector) -> NDArray[np.float64]:
        """Pairwise block reshaped to (K, D); row i holds the weights of hidden unit i."""
        return w[self.D + self.K :].reshape(self.K, self.D)

    def check_state(self, state: JointState) -> None:
        x = np.asarray(state.visible)
        z = np.asarray(state.hidden)
        if x.shape != (self.D,) or z.shape != (self.K,):
            raise DataError(
                f"state shapes {x.shape}/{z.shape} do not match RBM D={self.D}, K={self.K}"
            )

    def to_enumerated(self, unit_cap: int | None = None) -> EnumeratedModel:
        """Enumerate every joint configuration (2^D * 2^K rows).

        ``unit_cap`` bounds D + K and defaults to ENUMERATION_UNIT_CAP.
        """
        if unit_cap is None:
            unit_cap = get_settings().enumeration_unit_cap
        if self.D + self.K > unit_cap:
            raise DataError(f"D+K={self.D + self.K} exceeds enumeration cap {unit_cap}")
        xs = spin_product_states(self.D)
        zs = spin_product_states(self.K)
        rows = [rbm_features(self, x, z) for x in xs for z in zs]
        return EnumeratedModel(
            visible_states=xs,
            hidden_states=zs,
            feature_matrix=np.asarray(rows, dtype=np.float64),
        )


FeatureModel: TypeAlias = EnumeratedModel | RbmModel


def rbm_features(model: RbmModel, x: NDArray, z: NDArray) -> NDArray[np.float64]:
    """Spin feature vector (x, z, z_i x_j hidden-major)."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return np.concatenate([x, z, np.outer(z, x).ravel()])


def check_weights(model: FeatureModel, w: NDArray) -> WeightVector:
    """Validate a weight vector against a model and return it as float64."""
    arr = np.asarray(w, dtype=np.float64)
    if arr.shape != (model.num_features,):
        raise DataError(f"weight length {arr.shape} does not match {model.num_features} features")
    if not np.isfinite(arr).all():
        raise DataError("weights must be finite")
    return arr


def feature_vector(model: FeatureModel, state: JointState) -> NDArray[np.float64]:
    """Return (g_a(s_a))_a for one joint state."""
    model.check_state(state)
    if isinstance(model, RbmModel):
        return rbm_features(model, state.visible, state.hidden)
    return model.feature_matrix[model.joint_index(state)].copy()


def score(model: FeatureModel, w: NDArray, state: JointState) -> float:
    """Return sum_a w_a g_a(s)."""
    w = check_weights(model, w)
    return float(feature_vector(model, state) @ w)


def energy(model: FeatureModel, w: NDArray, state: JointState) -> float:
    return -score(model, w, state)


def mean_case_features(
    model: FeatureModel,
    visibles: NDArray,
    hiddens: NDArray,
) -> NDArray[np.float64]:
    """
    Average feature vector over data cases with imputed hidden states.

    The reduction order is fixed (integer sums for spins, a single ascending
    sum over table rows otherwise), so the result does not depend on how the
    hidden states were computed.

    Args:
        model: Feature model
        visibles: (N, D) spins for an RBM, (N,) visible indices otherwise
        hiddens: (N, K) spins for an RBM, (N,) hidden indices otherwise

    Returns:
        Length-F mean feature vector
    """
    n_cases = len(visibles)
    if isinstance(model, RbmModel):
        xs = np.asarray(visibles, dtype=np.int64)
        zs = np.asarray(hiddens, dtype=np.int64).reshape(n_cases, model.K)
        sums = np.concatenate([xs.sum(axis=0), zs.sum(axis=0), (zs.T @ xs).ravel()])
        return sums.astype(np.float64) / n_cases
    rows = np.asarray(visibles, dtype=np.int64) * model.num_hidden + np.asarray(hiddens)
    return model.feature_matrix[rows].sum(axis=0) / n_cases
