"""Shared helpers for the test suite."""

from __future__ import annotations

from dicelab.data import DataSpec
from dicelab.experiments import ExperimentConfig
from dicelab.losses import LossKind, LossSpec
from dicelab.trainer import TrainSpec


def tiny_config(**overrides) -> ExperimentConfig:
    """An experiment config small enough that run() finishes in well under a second."""
    base = dict(
        data=DataSpec(n_positive=30, ratio=2.0, seed=5),
        loss=LossSpec(LossKind.CE),
        train=TrainSpec(epochs=8, batch_size=16),
        replicate_seeds=(1, 2),
    )
    base.update(overrides)
    return ExperimentConfig(**base)
