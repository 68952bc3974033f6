"""State and parameter types for herding chains."""

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray

from core.errors import ConfigError, DataError
from models.feature_model import JointState, WeightVector


class Variant(StrEnum):
    """Herding variant; fixed for a chain's lifetime."""

    IDEALIZED = "idealized"  # exhaustive joint argmax, enumerable models only
    LOCAL = "local"  # coordinate ascent warm-started at the previous pseudo-sample
    SAFE = "safe"  # coordinate ascent started at the lowest-energy data case
    FULLY_OBSERVED = "fully_observed"  # no hidden units; fixed data moment drives
    DECOUPLED = "decoupled"  # a learned rate vector drives, no data access


@dataclass(frozen=True, eq=False)
class TransformParams:
    """Stepsize, energy scale and offset of the equivalent herding family.

    Maximizations use effective coefficients ``gamma * (w + offset)`` and the
    weight update is scaled by ``eta``.
    """

    eta: float = 1.0
    gamma: float = 1.0
    offset: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.offset is not None:
            offset = np.asarray(self.offset, dtype=np.float64)
            if not np.isfinite(offset).all():
                raise ConfigError("offset must be finite")
            object.__setattr__(self, "offset", offset)

    @property
    def is_canonical(self) -> bool:
        return self.eta == 1.0 and self.gamma == 1.0 and self.offset is None

    def check_length(self, num_features: int) -> None:
        if self.offset is not None and self.offset.shape != (num_features,):
            raise DataError(
                f"offset length {self.offset.shape} does not match {num_features} features"
            )

    def effective(self, w: WeightVector) -> WeightVector:
        """Coefficients the maximizers see."""
        shifted = w if self.offset is None else w + self.offset
        return shifted if self.gamma == 1.0 else self.gamma * shifted


@dataclass(frozen=True, eq=False)
class RateVector:
    """Learned driving rates r_a for data-decoupled herding."""

    r: NDArray[np.float64]
    count: int = 0

    def __post_init__(self) -> None:
        r = np.asarray(self.r, dtype=np.float64)
        if not np.isfinite(r).all():
            raise DataError("rates must be finite")
        if self.count < 0:
            raise DataError("rate count must be non-negative")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True, eq=False)
class HerdState:
    """One herding chain at step t.

    ``driving_sum`` and ``sample_sum`` accumulate the driving term and the
    pseudo-sample features over steps 1..t; their difference divided by t is
    the running moment gap.
    """

    t: int
    w: WeightVector
    w0: WeightVector
    z_cases: NDArray
    s_prev: JointState
    driving_moment: NDArray[np.float64]
    sample_moment: NDArray[np.float64]
    driving_sum: NDArray[np.float64]
    sample_sum: NDArray[np.float64]
    max_norm2: float
    max_norm_inf: float

    @property
    def norm2(self) -> float:
        return float(np.linalg.norm(self.w))

    @property
    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.w))) if self.w.size else 0.0


@dataclass
class Trajectory:
    """Series recorded every ``record_every`` steps of a run."""

    steps: list[int] = field(default_factory=list)
    norm2: list[float] = field(default_factory=list)
    norm_inf: list[float] = field(default_factory=list)
    gaps: list[NDArray[np.float64]] = field(default_factory=list)
    samples: list[JointState] = field(default_factory=list)
    weights: list[NDArray[np.float64]] = field(default_factory=list)
    hidden_cases: list[NDArray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def extend(self, other: "Trajectory") -> None:
        self.steps.extend(other.steps)
        self.norm2.extend(other.norm2)
        self.norm_inf.extend(other.norm_inf)
        self.gaps.extend(other.gaps)
        self.samples.extend(other.samples)
        self.weights.extend(other.weights)
        self.hidden_cases.extend(other.hidden_cases)
