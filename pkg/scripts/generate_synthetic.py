#!/usr/bin/env python3
"""Write synthetic datasets in the plain-text formats the CLI reads.

    patterns  <out>/{train,valid,test}_<label>.txt for the three 12x12 pattern classes
    spins     <out>/spins.txt with seeded random (or prototype-based) spin cases
    sincos    <out>/sincos_model.txt and <out>/sincos_data.txt for the demo system
"""

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.errors import HerdingError
from core.logging_config import setup_logging
from services.exporters import write_enumerated_model, write_spin_dataset, write_value_dataset
from services.synthetic import (
    PATTERN_CLASSES,
    build_sin_cos_system,
    prototype_spin_cases,
    random_spin_cases,
    structured_pattern_splits,
)

logger = logging.getLogger(__name__)


def generate_patterns(
    out: Path, sizes: tuple[int, int, int], noise: float, seed: int | None
) -> None:
    splits = structured_pattern_splits(sizes=sizes, noise=noise, seed=seed)
    for name, ds in zip(("train", "valid", "test"), splits, strict=True):
        for label in range(len(PATTERN_CLASSES)):
            write_spin_dataset(out / f"{name}_{label}.txt", ds.for_class(label).cases)
    logger.info(f"wrote pattern splits to {out}")


def generate_spins(
    out: Path,
    num_cases: int,
    dim: int,
    prototypes: int,
    noise: float,
    seed: int | None,
) -> None:
    if prototypes > 0:
        ds = prototype_spin_cases(num_cases, dim, prototypes, flip_prob=noise, seed=seed)
    else:
        ds = random_spin_cases(num_cases, dim, seed=seed)
    write_spin_dataset(out / "spins.txt", ds.cases)
    logger.info(f"wrote {num_cases} spin cases of dimension {dim} to {out / 'spins.txt'}")


def generate_sincos(out: Path, step: float) -> None:
    model, data = build_sin_cos_system(step)
    write_enumerated_model(out / "sincos_model.txt", model)
    write_value_dataset(out / "sincos_data.txt", data.cases)
    logger.info(f"wrote {model.num_visible}-point sin/cos model to {out}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Generate synthetic herding datasets")
    parser.add_argument("kind", choices=["patterns", "spins", "sincos"], help="Dataset family")
    parser.add_argument("--out", type=Path, default=Path("data"), help="Output directory")
    parser.add_argument("--seed", type=int, help="Generator seed (default: DEFAULT_SEED)")
    parser.add_argument(
        "--sizes",
        type=int,
        nargs=3,
        default=[100, 50, 50],
        metavar=("TRAIN", "VALID", "TEST"),
        help="Cases per class in each split (default: 100 50 50)",
    )
    parser.add_argument("--noise", type=float, default=0.05, help="Pixel flip probability")
    parser.add_argument("--cases", type=int, default=64, help="Spin cases (default: 64)")
    parser.add_argument("--dim", type=int, default=16, help="Spin dimension (default: 16)")
    parser.add_argument(
        "--prototypes",
        type=int,
        default=0,
        help="Draw noisy copies of this many prototypes instead of uniform spins",
    )
    parser.add_argument("--step", type=float, default=1.0, help="sin/cos grid spacing")
    args = parser.parse_args(argv)
    setup_logging()

    try:
        if args.kind == "patterns":
            generate_patterns(args.out, tuple(args.sizes), args.noise, args.seed)
        elif args.kind == "spins":
            generate_spins(args.out, args.cases, args.dim, args.prototypes, args.noise, args.seed)
        else:
            generate_sincos(args.out, args.step)
    except HerdingError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    print(f"\n✓ wrote {args.kind} data to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
