"""Experiment orchestration: replicated runs, loss/ratio sweeps, CSV results.

A run trains one (loss, dataset) configuration once per replicate seed and
evaluates every replicate on a shared held-out set drawn from the
untransformed data spec. The held-out seed is the data seed + 1 and its size
is 20% of the training size. Each replicate seed deterministically derives
three child seeds (generation, transform, trainer) via splitmix64, so runs
are reproducible end to end and CSV output is byte-identical across
executions of the same config.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

from .data import DataSpec, TransformKind, generate, transform
from .losses import LossKind, LossSpec
from .rng import splitmix64_at
from .trainer import ModelSpec, TrainSpec, evaluate, train

# Child-stream tags hung off each replicate seed.
_TAG_GENERATE = 0
_TAG_TRANSFORM = 1
_TAG_TRAINER = 2

CSV_COLUMNS = (
    "loss",
    "ratio",
    "transform",
    "alpha",
    "beta",
    "gamma",
    "seed",
    "precision",
    "recall",
    "f1",
    "accuracy",
)


@dataclass(frozen=True)
class TransformSpec:
    kind: TransformKind = TransformKind.ORIGINAL
    target_fraction_positive: float = 0.5
    growth_factor: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "kind", TransformKind(self.kind))


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataSpec
    loss: LossSpec
    transform: TransformSpec = TransformSpec()
    model: ModelSpec = ModelSpec()
    train: TrainSpec = TrainSpec()
    eval_threshold: float = 0.5
    replicate_seeds: tuple[int, ...] = (1, 2, 3, 4, 5)

    def __post_init__(self):
        if not (0.0 < self.eval_threshold < 1.0):
            raise ValueError("eval_threshold must lie strictly inside (0, 1)")
        object.__setattr__(self, "replicate_seeds", tuple(int(s) for s in self.replicate_seeds))
        if len(self.replicate_seeds) == 0:
            raise ValueError("replicate_seeds must be nonempty")


@dataclass(frozen=True)
class ResultRow:
    """One CSV row; seed is a string so aggregate rows can use 'mean' / 'std'."""

    loss: str
    ratio: float
    transform: str
    alpha: float
    beta: float
    gamma: float
    seed: str
    precision: float
    recall: float
    f1: float
    accuracy: float


def default_config() -> ExperimentConfig:
    return ExperimentConfig(
        data=DataSpec(n_positive=200, ratio=10.0),
        loss=LossSpec(LossKind.CE),
    )


def held_out_spec(data: DataSpec) -> DataSpec:
    """Shared evaluation spec: untransformed, seed + 1, a fifth of the size."""
    n_positive = max(1, int(math.floor(0.2 * data.n_positive + 0.5)))
    return replace(data, seed=data.seed + 1, n_positive=n_positive)


def _row(config: ExperimentConfig, seed_label: str, m) -> ResultRow:
    return ResultRow(
        loss=config.loss.kind.value,
        ratio=config.data.ratio,
        transform=config.transform.kind.value,
        alpha=config.loss.alpha,
        beta=config.loss.beta,
        gamma=config.loss.gamma,
        seed=seed_label,
        precision=m.precision,
        recall=m.recall,
        f1=m.f1,
        accuracy=m.accuracy,
    )


@dataclass(frozen=True)
class _Aggregate:
    precision: float
    recall: float
    f1: float
    accuracy: float


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _std(values: list[float]) -> float:
    m = _mean(values)
    return math.sqrt(_mean([(v - m) ** 2 for v in values]))


def run(config: ExperimentConfig) -> list[ResultRow]:
    """Train/evaluate one configuration per replicate seed, plus mean/std rows."""
    test_batch = generate(held_out_spec(config.data))
    rows: list[ResultRow] = []
    per_seed = []
    for seed in config.replicate_seeds:
        batch = generate(replace(config.data, seed=splitmix64_at(seed, _TAG_GENERATE)))
        if config.transform.kind is not TransformKind.ORIGINAL:
            batch = transform(
                batch,
                config.transform.kind,
                target_fraction_positive=config.transform.target_fraction_positive,
                seed=splitmix64_at(seed, _TAG_TRANSFORM),
                jitter_sigma=config.data.jitter_sigma,
                growth_factor=config.transform.growth_factor,
            )
        train_spec = replace(config.train, seed=splitmix64_at(seed, _TAG_TRAINER))
        model = train(batch, config.loss, config.model, train_spec)
        m = evaluate(model, test_batch, config.eval_threshold)
        per_seed.append(m)
        rows.append(_row(config, str(seed), m))

    for label, agg in (("mean", _mean), ("std", _std)):
        rows.append(
            _row(
                config,
                label,
                _Aggregate(
                    agg([m.precision for m in per_seed]),
                    agg([m.recall for m in per_seed]),
                    agg([m.f1 for m in per_seed]),
                    agg([m.accuracy for m in per_seed]),
                ),
            )
        )
    return rows


def sweep(
    config: ExperimentConfig,
    losses: list[LossKind],
    ratios: list[float],
) -> list[ResultRow]:
    """Cross every loss kind with every imbalance ratio."""
    if not losses or not ratios:
        raise ValueError("sweep needs at least one loss and one ratio")
    rows: list[ResultRow] = []
    for kind in losses:
        for ratio in ratios:
            sub = replace(
                config,
                data=replace(config.data, ratio=float(ratio)),
                loss=replace(config.loss, kind=LossKind(kind)),
            )
            rows.extend(run(sub))
    return sort_rows(rows)


def sweep_tversky(config: ExperimentConfig, alphas: list[float]) -> list[ResultRow]:
    """Trade precision against recall along beta = 1 - alpha."""
    if config.loss.kind is not LossKind.TL:
        raise ValueError("sweep_tversky requires a Tversky loss config")
    if not alphas:
        raise ValueError("sweep_tversky needs at least one alpha")
    for a in alphas:
        if not (0.0 <= a <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1] for the beta = 1 - alpha sweep, got {a}")
    rows: list[ResultRow] = []
    for a in sorted(alphas):
        sub = replace(config, loss=replace(config.loss, alpha=float(a), beta=1.0 - float(a)))
        rows.extend(run(sub))
    return sort_rows(rows)


# ---------------------------------------------------------------------------
# CSV output: fixed column order, 6-decimal floats, rows sorted for stability.
# ---------------------------------------------------------------------------


def _seed_sort_key(seed: str) -> tuple[int, float]:
    if seed == "mean":
        return (1, 0.0)
    if seed == "std":
        return (1, 1.0)
    return (0, float(seed))


def sort_rows(rows: list[ResultRow]) -> list[ResultRow]:
    return sorted(
        rows,
        key=lambda r: (r.loss, r.ratio, r.alpha, r.transform, _seed_sort_key(r.seed)),
    )


def rows_to_csv(rows: list[ResultRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in sort_rows(rows):
        lines.append(
            ",".join(
                (
                    r.loss,
                    f"{r.ratio:.6f}",
                    r.transform,
                    f"{r.alpha:.6f}",
                    f"{r.beta:.6f}",
                    f"{r.gamma:.6f}",
                    r.seed,
                    f"{r.precision:.6f}",
                    f"{r.recall:.6f}",
                    f"{r.f1:.6f}",
                    f"{r.accuracy:.6f}",
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_csv(rows))


# ---------------------------------------------------------------------------
# JSON config round trip. The layout mirrors the dataclass fields.
# ---------------------------------------------------------------------------


def config_to_dict(config: ExperimentConfig) -> dict:
    payload = asdict(config)
    payload["loss"]["kind"] = config.loss.kind.value
    payload["transform"]["kind"] = config.transform.kind.value
    payload["replicate_seeds"] = list(config.replicate_seeds)
    return payload


def config_to_json(config: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2) + "\n"


def _build_section(cls, payload: dict, section: str):
    values = payload.get(section, {})
    if not isinstance(values, dict):
        raise ValueError(f"config section {section!r} must be an object")
    allowed = {f for f in cls.__dataclass_fields__}
    unknown = set(values) - allowed
    if unknown:
        raise ValueError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
    return cls(**values)


def config_from_dict(payload: dict) -> ExperimentConfig:
    if not isinstance(payload, dict):
        raise ValueError("config must be a JSON object")
    known = {"data", "loss", "transform", "model", "train", "eval_threshold", "replicate_seeds"}
    unknown = set(payload) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "data" not in payload:
        raise ValueError("config requires a 'data' section")
    if "loss" not in payload or "kind" not in payload.get("loss", {}):
        raise ValueError("config requires a 'loss' section with a 'kind'")
    kwargs = {
        "data": _build_section(DataSpec, payload, "data"),
        "loss": _build_section(LossSpec, payload, "loss"),
        "transform": _build_section(TransformSpec, payload, "transform"),
        "model": _build_section(ModelSpec, payload, "model"),
        "train": _build_section(TrainSpec, payload, "train"),
    }
    if "eval_threshold" in payload:
        kwargs["eval_threshold"] = float(payload["eval_threshold"])
    if "replicate_seeds" in payload:
        kwargs["replicate_seeds"] = tuple(payload["replicate_seeds"])
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
