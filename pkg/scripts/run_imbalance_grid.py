#!/usr/bin/env python3
"""Sweep every loss kind across a grid of imbalance ratios.

Reproduces the headline comparison: how each loss's held-out F1 degrades as
the negative:positive ratio grows.  Weighted kinds (WCE, FL) receive class
weights computed from each training split inside the trainer.

Usage:
    python3 scripts/run_imbalance_grid.py --out grid.csv
    python3 scripts/run_imbalance_grid.py --out grid.csv --ratios 1,5,25,125
"""

from __future__ import annotations

import argparse
import sys

from dicelab.data import DataSpec
from dicelab.experiments import ExperimentConfig, sweep, write_csv
from dicelab.losses import LossKind, LossSpec
from dicelab.trainer import TrainSpec


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument(
        "--ratios", default="1,10,100", help="comma-separated neg:pos ratios (default 1,10,100)"
    )
    parser.add_argument("--epochs", type=int, default=200, help="training epochs (default 200)")
    parser.add_argument(
        "--easy-fraction",
        type=float,
        default=0.95,
        help="fraction of negatives drawn from the far cluster (default 0.95)",
    )
    args = parser.parse_args(argv)

    try:
        ratios = [float(tok) for tok in args.ratios.split(",") if tok.strip()]
    except ValueError:
        parser.error(f"--ratios must be comma-separated numbers, got {args.ratios!r}")
    if not ratios:
        parser.error("--ratios is empty")

    config = ExperimentConfig(
        data=DataSpec(n_positive=200, ratio=ratios[0], easy_negative_fraction=args.easy_fraction),
        loss=LossSpec(LossKind.CE),
        train=TrainSpec(epochs=args.epochs),
    )

    rows = sweep(config, list(LossKind), ratios)
    write_csv(rows, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
