"""Deterministic herding dynamics.

One step of a chain, with effective coefficients c = gamma * (w + offset):

1. impute z*_n = argmax_z c.g(x_n, z) for every data case,
2. pick a pseudo-sample s* with the variant's joint search,
3. move w by eta * (driving - g(s*)) on every non-frozen coordinate.

The driving term is the data average under imputed hidden states, the fixed
data moment of a fully observed model, or a learned rate vector.
"""

import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from core.config import get_settings
from core.errors import ConfigError, DataError, InvariantViolation
from models.dataset import Dataset
from models.feature_model import (
    EnumeratedModel,
    FeatureModel,
    JointState,
    RbmModel,
    WeightVector,
    check_weights,
    feature_vector,
    mean_case_features,
)
from models.herd_state import HerdState, RateVector, Trajectory, TransformParams, Variant
from services.maximizers import (
    AscentConfig,
    argmax_hidden_batch,
    argmax_joint_exhaustive,
    ascend_joint,
    lowest_energy_from,
)

logger = logging.getLogger(__name__)

StateObserver = Callable[[HerdState], None]

_DATA_DRIVEN = (Variant.IDEALIZED, Variant.LOCAL, Variant.SAFE)


@dataclass(frozen=True)
class ChainConfig:
    """Settings fixed for a chain's lifetime.

    Attributes:
        variant: Herding variant
        transform: Stepsize, scale and offset
        freeze_hidden_bias: Skip updates of RBM hidden-bias features
        frozen: Additional feature indices that are never updated
        ascent: Coordinate-ascent sweep limit
        rates: Driving rates for DECOUPLED chains
        threads: Worker count for per-case maximization (None reads HERD_THREADS)
        seed: Seed of the default initial weights (None reads settings)
    """

    variant: Variant = Variant.LOCAL
    transform: TransformParams = field(default_factory=TransformParams)
    freeze_hidden_bias: bool = False
    frozen: tuple[int, ...] = ()
    ascent: AscentConfig = field(default_factory=AscentConfig.from_settings)
    rates: RateVector | None = None
    threads: int | None = None
    seed: int | None = None


class HerdingEngine:
    """Runs one herding chain over a fixed model and dataset."""

    # Fixed chunking keeps results independent of the worker count
    CHUNK_SIZE = 256

    def __init__(
        self,
        model: FeatureModel,
        data: Dataset | None,
        config: ChainConfig | None = None,
    ) -> None:
        """
        Initialize the engine.

        Args:
            model: Feature model
            data: Observed cases (optional only for DECOUPLED chains)
            config: Chain configuration
        """
        self.model = model
        self.data = data
        self.config = config or ChainConfig()
        self.settings = get_settings()
        self._validate()

        self.visibles = data.visibles_for(model) if data is not None else None
        self.frozen_mask = self._build_frozen_mask()
        self.data_moment = self._fully_observed_moment()

        threads = self.config.threads or self.settings.herd_threads
        self._executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def _validate(self) -> None:
        cfg = self.config
        model = self.model
        cfg.transform.check_length(model.num_features)
        if cfg.variant is Variant.IDEALIZED and not isinstance(model, EnumeratedModel):
            raise ConfigError("idealized herding needs an enumerated model")
        if cfg.variant is Variant.FULLY_OBSERVED and not model.fully_observed:
            raise ConfigError("fully observed herding needs a model without hidden units")
        if cfg.variant is Variant.DECOUPLED:
            if cfg.rates is None:
                raise ConfigError("decoupled herding needs a rate vector")
            if cfg.rates.r.shape != (model.num_features,):
                raise DataError(
                    f"rate length {cfg.rates.r.shape} does not match {model.num_features} features"
                )
        elif self.data is None:
            raise ConfigError(f"{cfg.variant} herding needs data")
        if cfg.freeze_hidden_bias and not isinstance(model, RbmModel):
            raise ConfigError("hidden-bias freezing applies to RBM models only")
        if any(not 0 <= a < model.num_features for a in cfg.frozen):
            raise ConfigError("frozen feature index out of range")

    def _build_frozen_mask(self) -> NDArray[np.bool_]:
        mask = np.zeros(self.model.num_features, dtype=bool)
        mask[list(self.config.frozen)] = True
        if self.config.freeze_hidden_bias and isinstance(self.model, RbmModel):
            mask[self.model.hidden_bias_indices()] = True
        return mask

    def _fully_observed_moment(self) -> NDArray[np.float64] | None:
        if self.config.variant is not Variant.FULLY_OBSERVED:
            return None
        assert self.visibles is not None
        n = len(self.visibles)
        if isinstance(self.model, RbmModel):
            hiddens: NDArray = np.zeros((n, 0), dtype=np.int8)
        else:
            hiddens = np.zeros(n, dtype=np.int64)
        return mean_case_features(self.model, self.visibles, hiddens)

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "HerdingEngine":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    # ------------------------------------------------------------------ #
    # Initialization
    # ------------------------------------------------------------------ #

    def default_w0(self, seed: int | None = None) -> WeightVector:
        """Seeded uniform weights in [-init_scale, init_scale]."""
        if seed is None:
            seed = self.config.seed if self.config.seed is not None else self.settings.default_seed
        rng = np.random.default_rng(seed)
        scale = self.settings.init_scale
        return rng.uniform(-scale, scale, size=self.model.num_features)

    def init_chain(self, w0: NDArray | None = None) -> HerdState:
        """
        Create the chain state at t = 0.

        Args:
            w0: Initial weights (default: seeded small uniform values)

        Returns:
            Initial HerdState with hidden states imputed under w0
        """
        w0 = self.default_w0() if w0 is None else check_weights(self.model, w0).copy()
        coeffs = self.config.transform.effective(w0)
        num_features = self.model.num_features

        if self.config.variant in _DATA_DRIVEN:
            z_cases = self._impute_hidden(coeffs)
            s_prev = self._case_state(0, z_cases)
        else:
            z_cases = np.zeros(0, dtype=np.int8)
            s_prev = self._decoupled_start(coeffs)

        norm2 = float(np.linalg.norm(w0))
        norm_inf = float(np.max(np.abs(w0)))
        return HerdState(
            t=0,
            w=w0,
            w0=w0.copy(),
            z_cases=z_cases,
            s_prev=s_prev,
            driving_moment=np.zeros(num_features),
            sample_moment=np.zeros(num_features),
            driving_sum=np.zeros(num_features),
            sample_sum=np.zeros(num_features),
            max_norm2=norm2,
            max_norm_inf=norm_inf,
        )

    def _case_state(self, n: int, z_cases: NDArray) -> JointState:
        assert self.visibles is not None
        if isinstance(self.model, RbmModel):
            return JointState(
                visible=np.asarray(self.visibles[n], dtype=np.int8),
                hidden=np.asarray(z_cases[n], dtype=np.int8),
            )
        return JointState(visible=int(self.visibles[n]), hidden=int(z_cases[n]))

    def _decoupled_start(self, coeffs: WeightVector) -> JointState:
        """Warm start without imputed cases: data case 0 if present, else a fixed state."""
        model = self.model
        if self.visibles is not None:
            hidden = argmax_hidden_batch(model, coeffs, self.visibles[:1])
            return self._case_state(0, hidden)
        if isinstance(model, RbmModel):
            x = np.ones(model.D, dtype=np.int8)
            z = argmax_hidden_batch(model, coeffs, x[None, :])[0]
            return JointState(visible=x, hidden=z)
        return JointState(visible=0, hidden=0)

    # ------------------------------------------------------------------ #
    # Dynamics
    # ------------------------------------------------------------------ #

    def _impute_hidden(self, coeffs: WeightVector) -> NDArray:
        assert self.visibles is not None
        n = len(self.visibles)
        chunks = [self.visibles[i : i + self.CHUNK_SIZE] for i in range(0, n, self.CHUNK_SIZE)]
        if self._executor is None or len(chunks) == 1:
            parts = [argmax_hidden_batch(self.model, coeffs, c) for c in chunks]
        else:
            parts = list(
                self._executor.map(lambda c: argmax_hidden_batch(self.model, coeffs, c), chunks)
            )
        return np.concatenate(parts, axis=0)

    def _search_joint(
        self,
        coeffs: WeightVector,
        state: HerdState,
        z_cases: NDArray,
    ) -> JointState:
        variant = self.config.variant
        if variant is Variant.IDEALIZED:
            return argmax_joint_exhaustive(self.model, coeffs)  # type: ignore[arg-type]
        if variant is Variant.LOCAL:
            return ascend_joint(self.model, coeffs, state.s_prev, self.config.ascent)
        if variant is Variant.SAFE:
            assert self.visibles is not None
            _, start = lowest_energy_from(self.model, coeffs, self.visibles, z_cases)
            return ascend_joint(self.model, coeffs, start, self.config.ascent)
        # FULLY_OBSERVED and DECOUPLED share one search so their orbits coincide
        if isinstance(self.model, EnumeratedModel):
            return argmax_joint_exhaustive(self.model, coeffs)
        return ascend_joint(self.model, coeffs, state.s_prev, self.config.ascent)

    def step(self, state: HerdState) -> HerdState:
        """
        Apply one herding update.

        Args:
            state: Chain state at t - 1

        Returns:
            New chain state at t (the input is not modified)
        """
        cfg = self.config
        coeffs = cfg.transform.effective(state.w)

        if cfg.variant in _DATA_DRIVEN:
            z_cases = self._impute_hidden(coeffs)
            driving = mean_case_features(self.model, self.visibles, z_cases)
        elif cfg.variant is Variant.FULLY_OBSERVED:
            z_cases = state.z_cases
            driving = self.data_moment
        else:
            z_cases = state.z_cases
            driving = cfg.rates.r  # type: ignore[union-attr]

        s_star = self._search_joint(coeffs, state, z_cases)
        g_star = feature_vector(self.model, s_star)

        delta = driving - g_star
        delta[self.frozen_mask] = 0.0
        w = state.w + cfg.transform.eta * delta

        norm2 = float(np.linalg.norm(w))
        norm_inf = float(np.max(np.abs(w)))
        return HerdState(
            t=state.t + 1,
            w=w,
            w0=state.w0,
            z_cases=z_cases,
            s_prev=s_star,
            driving_moment=np.array(driving, dtype=np.float64),
            sample_moment=g_star,
            driving_sum=state.driving_sum + driving,
            sample_sum=state.sample_sum + g_star,
            max_norm2=max(state.max_norm2, norm2),
            max_norm_inf=max(state.max_norm_inf, norm_inf),
        )

    def run(
        self,
        state: HerdState,
        steps: int,
        record_every: int = 1,
        observers: Iterable[StateObserver] = (),
        record_weights: bool = False,
        record_hidden: bool = False,
    ) -> tuple[HerdState, Trajectory]:
        """
        Apply ``steps`` herding updates and record every ``record_every`` steps.

        Recording uses the absolute step counter, so splitting a run into
        pieces yields the same series as one long run.

        Args:
            state: Starting chain state
            steps: Number of updates (>= 1)
            record_every: Recording period
            observers: Callables invoked with every new state
            record_weights: Also keep weight snapshots
            record_hidden: Also keep the imputed hidden states

        Returns:
            Final state and the recorded trajectory
        """
        if steps < 1:
            raise ConfigError(f"steps must be >= 1, got {steps}")
        if record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {record_every}")
        observers = list(observers)
        trajectory = Trajectory()
        log_every = self.settings.log_every

        for _ in range(steps):
            state = self.step(state)
            for observer in observers:
                observer(state)
            if state.t % record_every == 0:
                trajectory.steps.append(state.t)
                trajectory.norm2.append(state.norm2)
                trajectory.norm_inf.append(state.norm_inf)
                trajectory.gaps.append(moment_gap(state))
                trajectory.samples.append(state.s_prev)
                if record_weights:
                    trajectory.weights.append(state.w.copy())
                if record_hidden:
                    trajectory.hidden_cases.append(state.z_cases.copy())
            if state.t % log_every == 0:
                logger.info(
                    f"{self.config.variant} t={state.t} |w|2={state.norm2:.4f} "
                    f"|gap|inf={np.max(np.abs(moment_gap(state))):.3e}"
                )

        return state, trajectory


def moment_gap(state: HerdState) -> NDArray[np.float64]:
    """
    Running mean of the driving term minus running mean of g(s*).

    On non-frozen coordinates this equals (w_t - w_0) / (eta * t).
    """
    if state.t == 0:
        raise DataError("moment gap is undefined at t = 0")
    return (state.driving_sum - state.sample_sum) / state.t


def telescoping_residual(
    state: HerdState,
    eta: float = 1.0,
    frozen_mask: NDArray[np.bool_] | None = None,
) -> float:
    """Max-norm difference between the moment gap and (w_t - w_0) / (eta * t)."""
    diff = moment_gap(state) - (state.w - state.w0) / (eta * state.t)
    if frozen_mask is not None:
        diff = diff[~frozen_mask]
    return float(np.max(np.abs(diff))) if diff.size else 0.0


class RateLearner:
    """Online average of the driving term, observed step by step.

    ``phase="positive"`` averages the data-side driving term; ``"negative"``
    averages the pseudo-sample features g(s*_t) instead.
    """

    def __init__(self, num_features: int, phase: Literal["positive", "negative"] = "positive"):
        if phase not in ("positive", "negative"):
            raise ConfigError(f"unknown rate phase {phase!r}")
        self.phase = phase
        self.r = np.zeros(num_features)
        self.count = 0

    def update(self, value: NDArray) -> None:
        self.count += 1
        t = self.count
        self.r = ((t - 1) / t) * self.r + (1.0 / t) * np.asarray(value, dtype=np.float64)

    def __call__(self, state: HerdState) -> None:
        self.update(state.driving_moment if self.phase == "positive" else state.sample_moment)

    def rates(self) -> RateVector:
        return RateVector(r=self.r.copy(), count=self.count)


def learn_rates(driving_series: Sequence[NDArray] | NDArray) -> RateVector:
    """
    Rates from a recorded series of driving terms.

    r_t = ((t - 1) / t) * r_{t-1} + (1 / t) * gbar_t, r_0 = 0
    """
    series = [np.asarray(g, dtype=np.float64) for g in driving_series]
    if not series:
        raise DataError("rate learning needs at least one driving term")
    learner = RateLearner(series[0].shape[0])
    for g in series:
        learner.update(g)
    return learner.rates()


def apply_transform_equivalence(w0: NDArray, transform: TransformParams) -> WeightVector:
    """Initial weights v0 = (w0 + a) / eta of the equivalent canonical chain."""
    w0 = np.asarray(w0, dtype=np.float64)
    shifted = w0 if transform.offset is None else w0 + transform.offset
    return shifted / transform.eta


def hidden_activation_rates(trajectory: Trajectory) -> NDArray[np.float64]:
    """Fraction of recorded RBM pseudo-samples with each hidden unit at +1."""
    if not trajectory.samples:
        raise DataError("trajectory has no recorded samples")
    hidden = np.array([np.asarray(s.hidden) for s in trajectory.samples], dtype=np.float64)
    return (hidden > 0).mean(axis=0)


def verify_telescoping(
    state: HerdState,
    eta: float = 1.0,
    frozen_mask: NDArray[np.bool_] | None = None,
    tol: float = 1e-10,
) -> float:
    """
    Check the moment-gap identity at ``state.t``.

    Raises:
        InvariantViolation: If the residual exceeds ``tol * t``
    """
    residual = telescoping_residual(state, eta, frozen_mask)
    if residual > tol * state.t:
        raise InvariantViolation(
            f"moment gap drifted from (w_t - w_0) / (eta t) by {residual:.3e} at t={state.t}"
        )
    return residual
