#!/usr/bin/env python3
"""Herding toolkit command line.

Subcommands:
    run        one herding chain; trajectory, final weights, pseudo-samples
    demo-tipi  objective surface and weight orbit of the sin/cos system
    rates      learn driving rates, optionally run a decoupled chain and export filters
    sample     decoupled chain from a weight snapshot and a rate file
    classify   per-class energy features, MLR and 1NN accuracy report

Exit codes: 0 success, 2 configuration error, 3 data error, 4 invariant violation.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.config import get_settings
from core.errors import DataError, HerdingError
from core.logging_config import setup_logging
from models.dataset import Dataset, concat_datasets
from models.feature_model import FeatureModel, RbmModel
from models.herd_state import HerdState, RateVector, Trajectory, TransformParams, Variant
from models.run_config import (
    ClassifyConfig,
    CommandConfig,
    DemoTipiConfig,
    Method,
    RatesConfig,
    RunConfig,
    SampleConfig,
    load_config,
)
from parsers.dataset_parser import (
    load_class_splits,
    load_dataset,
    load_enumerated_model,
    read_vector,
)
from services.classification import build_feature_table, split_rows, verify_zscore_moments
from services.exporters import (
    export_rate_filters,
    write_feature_table_csv,
    write_json,
    write_metrics,
    write_orbit_csv,
    write_sample_stream,
    write_surface_csv,
    write_trajectory_csv,
    write_vector,
)
from services.herding import ChainConfig, HerdingEngine, RateLearner, verify_telescoping
from services.knn import knn1_predict
from services.maximizers import AscentConfig
from services.mlr import accuracy, mlr_train
from services.synthetic import build_sin_cos_system, grid_means
from services.tipi import bound_diagnostics, tipi_surface

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------- #
# Shared helpers
# ---------------------------------------------------------------------- #


def resolve_model(cfg: RunConfig) -> tuple[FeatureModel, Dataset | None]:
    """Build the feature model and load its data as configured."""
    if cfg.model == "sincos":
        model, data = build_sin_cos_system(cfg.grid_step)
        if cfg.data is not None:
            data = load_dataset(cfg.data, spins=False)
        return model, data

    if cfg.model == "enumerated":
        assert cfg.model_file is not None
        enumerated = load_enumerated_model(cfg.model_file)
        data = load_dataset(cfg.data, spins=False) if cfg.data is not None else None
        return enumerated, data

    data = load_dataset(cfg.data, cfg.binary, cfg.threshold) if cfg.data is not None else None
    visible = cfg.visible if cfg.visible is not None else data.dim  # type: ignore[union-attr]
    return RbmModel(D=visible, K=cfg.hidden), data


def build_ascent(cfg: CommandConfig) -> AscentConfig:
    if cfg.max_sweeps is None:
        return AscentConfig.from_settings()
    return AscentConfig(max_sweeps=cfg.max_sweeps)


def build_chain_config(cfg: RunConfig, model: FeatureModel) -> ChainConfig:
    """Translate a run configuration into the engine's chain settings."""
    offset = None
    if cfg.offset_file is not None:
        offset = read_vector(cfg.offset_file, model.num_features)
    rates = None
    if cfg.rates_file is not None:
        rates = RateVector(r=read_vector(cfg.rates_file, model.num_features))
    return ChainConfig(
        variant=cfg.variant,
        transform=TransformParams(eta=cfg.eta, gamma=cfg.gamma, offset=offset),
        freeze_hidden_bias=cfg.freeze_hidden_bias,
        ascent=build_ascent(cfg),
        rates=rates,
        seed=cfg.seed,
    )


def run_chain(
    engine: HerdingEngine,
    steps: int,
    record_every: int,
    w0: np.ndarray | None = None,
    observers: tuple = (),
    record_weights: bool = False,
) -> tuple[HerdState, Trajectory]:
    """Initialize, run and verify the moment-gap identity of one chain."""
    state = engine.init_chain(w0)
    state, trajectory = engine.run(
        state,
        steps,
        record_every=record_every,
        observers=observers,
        record_weights=record_weights,
    )
    verify_telescoping(state, engine.config.transform.eta, engine.frozen_mask)
    return state, trajectory


def chain_summary(
    model: FeatureModel, state: HerdState, trajectory: Trajectory, eta: float
) -> dict:
    bounds = bound_diagnostics(model, trajectory.norm2, eta=eta)
    return {
        "t": state.t,
        "final_norm2": state.norm2,
        "final_norm_inf": state.norm_inf,
        "max_norm2": state.max_norm2,
        "max_norm_inf": state.max_norm_inf,
        "norm_inf_over_t": state.norm_inf / state.t,
        "grad_bound_B": bounds.grad_bound_B,
        "recurrence_radius_R": bounds.recurrence_radius_R,
        "safe_radius_Rprime": bounds.safe_radius_Rprime,
    }


def write_chain_outputs(
    out: Path,
    model: FeatureModel,
    state: HerdState,
    trajectory: Trajectory,
    eta: float,
    prefix: str = "",
) -> None:
    write_trajectory_csv(out / f"{prefix}trajectory.csv", trajectory)
    write_vector(out / f"{prefix}weights.txt", state.w)
    write_sample_stream(out / f"{prefix}samples.txt", model, trajectory.samples)
    write_json(out / f"{prefix}summary.json", chain_summary(model, state, trajectory, eta))


def echo_config(cfg: CommandConfig) -> None:
    write_json(cfg.out / "effective_config.json", cfg.model_dump(mode="json"))


# ---------------------------------------------------------------------- #
# Commands
# ---------------------------------------------------------------------- #


def cmd_run(cfg: RunConfig) -> int:
    """Run one herding chain and write its trajectory, weights and pseudo-samples."""
    echo_config(cfg)
    model, data = resolve_model(cfg)
    chain = build_chain_config(cfg, model)
    w0 = read_vector(cfg.w0_file, model.num_features) if cfg.w0_file is not None else None

    logger.info(f"running {cfg.variant} herding for {cfg.steps} steps, F={model.num_features}")
    with HerdingEngine(model, data, chain) as engine:
        state, trajectory = run_chain(engine, cfg.steps, cfg.record_every, w0)

    write_chain_outputs(cfg.out, model, state, trajectory, cfg.eta)
    logger.info(f"max |w|2={state.max_norm2:.4f}, |w_T|inf/T={state.norm_inf / state.t:.3e}")
    return 0


def cmd_sample(cfg: SampleConfig) -> int:
    """Re-emit pseudo-samples from a weight snapshot driven by stored rates."""
    return cmd_run(cfg)


def cmd_demo_tipi(cfg: DemoTipiConfig) -> int:
    """Objective surface over (w_sin, w_cos) plus the herding orbit."""
    echo_config(cfg)
    model, data = build_sin_cos_system(cfg.grid_step)
    axis = np.linspace(-cfg.weight_range, cfg.weight_range, cfg.grid_points)
    surface = tipi_surface(model, data, axis, axis)
    write_surface_csv(cfg.out / "tipi_surface.csv", axis, axis, surface)

    chain = ChainConfig(variant=cfg.variant, ascent=build_ascent(cfg), seed=cfg.seed)
    with HerdingEngine(model, data, chain) as engine:
        state, trajectory = run_chain(
            engine, cfg.steps, cfg.record_every, record_weights=True
        )

    write_orbit_csv(cfg.out / "orbit.csv", trajectory.steps, trajectory.weights)
    write_trajectory_csv(cfg.out / "trajectory.csv", trajectory)
    time_avg = state.sample_sum / state.t
    means = grid_means(model)
    write_json(
        cfg.out / "summary.json",
        {
            "t": state.t,
            "grid": [float(v) for v in model.visible_states[:, 0]],
            "grid_means": [float(v) for v in means],
            "time_averages": [float(v) for v in time_avg],
            "max_abs_error": float(np.max(np.abs(time_avg - means))),
            "orbit_half_width": state.max_norm_inf,
        },
    )
    logger.info(f"feature averages {time_avg} vs grid means {means} after {state.t} steps")
    return 0


def cmd_rates(cfg: RatesConfig) -> int:
    """Learn a rate vector, then optionally run a decoupled chain and export filters."""
    echo_config(cfg)
    model, data = resolve_model(cfg)
    chain = build_chain_config(cfg, model)
    w0 = read_vector(cfg.w0_file, model.num_features) if cfg.w0_file is not None else None
    learner = RateLearner(model.num_features, phase=cfg.phase)

    with HerdingEngine(model, data, chain) as engine:
        state, trajectory = run_chain(engine, cfg.steps, cfg.record_every, w0, (learner,))
    write_chain_outputs(cfg.out, model, state, trajectory, cfg.eta)

    rates = learner.rates()
    write_vector(cfg.out / "rates.txt", rates.r)
    logger.info(f"learned {cfg.phase} rates from {rates.count} steps")

    if cfg.decoupled_steps > 0:
        decoupled = ChainConfig(
            variant=Variant.DECOUPLED,
            transform=chain.transform,
            freeze_hidden_bias=chain.freeze_hidden_bias,
            ascent=chain.ascent,
            rates=rates,
        )
        with HerdingEngine(model, data, decoupled) as engine:
            d_state, d_traj = run_chain(engine, cfg.decoupled_steps, cfg.record_every, state.w)
        write_chain_outputs(cfg.out, model, d_state, d_traj, cfg.eta, prefix="decoupled_")

    if cfg.export_filters:
        assert isinstance(model, RbmModel)
        export_rate_filters(
            cfg.out / "filters",
            model,
            rates.r,
            cfg.filter_height,  # type: ignore[arg-type]
            cfg.filter_width,  # type: ignore[arg-type]
        )
    return 0


def _herding_accuracy(
    cfg: ClassifyConfig,
    method: Method,
    model: RbmModel,
    splits: dict[str, Dataset],
) -> float:
    variant = Variant.LOCAL if method is Method.HERDING_H else Variant.SAFE
    chain = ChainConfig(
        variant=variant,
        transform=TransformParams(eta=cfg.eta),
        freeze_hidden_bias=cfg.freeze_hidden_bias,
        ascent=build_ascent(cfg),
        seed=cfg.seed,
    )
    valid, test = splits["valid"], splits["test"]
    eval_cases = concat_datasets([valid, test])
    table, results = build_feature_table(
        model, splits["train"], eval_cases, chain, cfg.iters, cfg.eval_window
    )
    verify_zscore_moments(results)

    case_ids = [f"valid_{k}" for k in range(valid.num_cases)]
    case_ids += [f"test_{k}" for k in range(test.num_cases)]
    write_feature_table_csv(
        cfg.out / f"features_{method}.csv",
        table.features,
        table.class_labels,
        table.labels,
        case_ids,
    )

    valid_rows, test_rows = split_rows(table, [valid.num_cases, test.num_cases])
    clf = mlr_train(
        valid_rows.features, valid.labels, reg=cfg.mlr_reg, iters=cfg.mlr_iters, lr=cfg.mlr_lr
    )
    return accuracy(clf.predict(test_rows.features), test.labels)


def cmd_classify(cfg: ClassifyConfig) -> int:
    """Accuracy report for the configured methods on per-class data files."""
    echo_config(cfg)
    splits = load_class_splits(cfg.data_dir, cfg.binary, cfg.threshold)
    train, test = splits["train"], splits["test"]
    class_labels = np.unique(train.labels)
    if class_labels.size < 2:
        raise DataError("classification needs at least two classes")

    model = RbmModel(D=train.dim, K=cfg.hidden)
    metrics: dict[str, float] = {}
    for method in Method:
        if method not in cfg.methods:
            continue
        logger.info(f"evaluating {method}")
        if method is Method.PIXEL_MLR:
            clf = mlr_train(
                train.cases, train.labels, reg=cfg.mlr_reg, iters=cfg.mlr_iters, lr=cfg.mlr_lr
            )
            metrics[method] = accuracy(clf.predict(test.cases), test.labels)
        elif method is Method.KNN1:
            predicted = knn1_predict(train.cases, train.labels, test.cases)
            metrics[method] = accuracy(predicted, test.labels)
        else:
            metrics[method] = _herding_accuracy(cfg, method, model, splits)
        logger.info(f"{method} test accuracy {metrics[method]:.4f}")

    write_metrics(cfg.out / "metrics.txt", metrics)
    return 0


# ---------------------------------------------------------------------- #
# Argument parsing
# ---------------------------------------------------------------------- #


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    parser.add_argument("--out", type=Path, help="Output directory (default: out)")
    parser.add_argument("--seed", type=int, help="Seed of the default initial weights")
    parser.add_argument("--max-sweeps", type=int, help="Coordinate-ascent sweep limit")


def _add_chain_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--model",
        choices=["rbm", "enumerated", "sincos"],
        help="Model family (default: rbm)",
    )
    parser.add_argument("--visible", type=int, help="RBM visible units (default: data dimension)")
    parser.add_argument("--hidden", type=int, help="RBM hidden units (default: 0)")
    parser.add_argument("--model-file", type=Path, help="Enumerated model table")
    parser.add_argument("--grid-step", type=float, help="Grid spacing of the sin/cos system")
    parser.add_argument("--data", type=Path, help="Dataset file (spin or grayscale format)")
    parser.add_argument(
        "--binary",
        action=argparse.BooleanOptionalAction,
        help="Dataset holds 0/1 instead of -1/+1",
    )
    parser.add_argument("--threshold", type=float, help="Grayscale binarization threshold")
    parser.add_argument("--variant", choices=[v.value for v in Variant], help="Herding variant")
    parser.add_argument("--steps", type=int, help="Herding steps")
    parser.add_argument("--record-every", type=int, help="Recording period")
    parser.add_argument("--eta", type=float, help="Stepsize")
    parser.add_argument("--gamma", type=float, help="Energy scale of the maximizations")
    parser.add_argument("--offset-file", type=Path, help="Offset vector file")
    parser.add_argument("--w0-file", type=Path, help="Initial weight vector file")
    parser.add_argument("--rates-file", type=Path, help="Rate vector file (decoupled herding)")
    parser.add_argument(
        "--freeze-hidden-bias",
        action=argparse.BooleanOptionalAction,
        help="Never update RBM hidden-bias weights",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Deterministic herding toolkit")
    parser.add_argument("--log-level", help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one herding chain")
    _add_common_args(run)
    _add_chain_args(run)

    sample = sub.add_parser("sample", help="Decoupled chain from a weight snapshot and rates")
    _add_common_args(sample)
    _add_chain_args(sample)

    rates = sub.add_parser("rates", help="Learn driving rates")
    _add_common_args(rates)
    _add_chain_args(rates)
    rates.add_argument("--phase", choices=["positive", "negative"], help="Averaged term")
    rates.add_argument("--decoupled-steps", type=int, help="Steps of the follow-up decoupled run")
    rates.add_argument(
        "--export-filters",
        action=argparse.BooleanOptionalAction,
        help="Write one PGM rate filter per hidden unit",
    )
    rates.add_argument("--filter-height", type=int, help="Filter image height")
    rates.add_argument("--filter-width", type=int, help="Filter image width")

    demo = sub.add_parser("demo-tipi", help="Objective surface and orbit of the sin/cos system")
    _add_common_args(demo)
    demo.add_argument("--grid-points", type=int, help="Surface points per axis (>= 3)")
    demo.add_argument("--weight-range", type=float, help="Surface half-width")
    demo.add_argument("--grid-step", type=float, help="Spacing of the x grid")
    demo.add_argument("--variant", choices=[v.value for v in Variant], help="Herding variant")
    demo.add_argument("--steps", type=int, help="Herding steps")
    demo.add_argument("--record-every", type=int, help="Recording period")

    classify = sub.add_parser("classify", help="Energy-feature classification report")
    _add_common_args(classify)
    classify.add_argument("--data-dir", type=Path, help="Directory of <split>_<label>.txt files")
    classify.add_argument(
        "--binary",
        action=argparse.BooleanOptionalAction,
        help="Files hold 0/1 instead of -1/+1",
    )
    classify.add_argument("--threshold", type=float, help="Grayscale binarization threshold")
    classify.add_argument("--hidden", type=int, help="RBM hidden units (default: 8)")
    classify.add_argument("--iters", type=int, help="Herding iterations per class")
    classify.add_argument("--window-start", type=int, help="First averaged iteration")
    classify.add_argument("--window-end", type=int, help="Last averaged iteration")
    classify.add_argument(
        "--freeze-hidden-bias",
        action=argparse.BooleanOptionalAction,
        help="Never update hidden-bias weights (default: on)",
    )
    classify.add_argument("--eta", type=float, help="Stepsize")
    classify.add_argument(
        "--methods",
        nargs="+",
        choices=[m.value for m in Method],
        help="Methods to report (default: all)",
    )
    classify.add_argument("--mlr-iters", type=int, help="MLR gradient steps")
    classify.add_argument("--mlr-lr", type=float, help="MLR learning rate")
    classify.add_argument("--mlr-reg", type=float, help="MLR L2 coefficient")

    return parser


COMMANDS: dict[str, tuple[type[CommandConfig], Any]] = {
    "run": (RunConfig, cmd_run),
    "sample": (SampleConfig, cmd_sample),
    "rates": (RatesConfig, cmd_rates),
    "demo-tipi": (DemoTipiConfig, cmd_demo_tipi),
    "classify": (ClassifyConfig, cmd_classify),
}

_NOT_CONFIG = {"command", "config", "log_level"}


def _describe_validation_error(e: ValidationError) -> str:
    first = e.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "config"
    return f"{location}: {first['msg']}"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    config_cls, command = COMMANDS[args.command]
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    try:
        cfg = load_config(config_cls, args.config, overrides)
        logger.info(f"{args.command}: threads={get_settings().herd_threads}, out={cfg.out}")
        code = command(cfg)
    except ValidationError as e:
        logger.error(f"invalid configuration: {_describe_validation_error(e)}")
        return 2
    except HerdingError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    print(f"\n✓ {args.command} finished, outputs in {cfg.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
