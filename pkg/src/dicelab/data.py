"""Synthetic imbalanced binary classification data with replayable randomness.

The geometry is fixed: positives sit at (+1, ..., +1), easy negatives far away
at (-2, ..., -2), hard negatives overlapping the positives at (+0.5, ..., +0.5),
all with per-coordinate sigma 0.5. The negative:positive ratio and the easy
fraction control the difficulty. Every random choice flows from one seeded
xoshiro256** stream in a documented order, so a (spec, seed) pair always
produces the identical array bit for bit.

Transforms mirror common rebalancing strategies: duplicate-and-jitter one or
both classes toward a target positive fraction, or downsample negatives.
Added rows are always appended after the originals; removed rows keep the
survivors in their original order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rng import Xoshiro256StarStar

POSITIVE_CENTER = 1.0
EASY_NEGATIVE_CENTER = -2.0
HARD_NEGATIVE_CENTER = 0.5
CLUSTER_SIGMA = 0.5


class InfeasibleTransformError(ValueError):
    """The requested class balance cannot be reached by the chosen transform."""


class TransformKind(str, Enum):
    ORIGINAL = "original"
    ADD_POSITIVE = "add_positive"
    ADD_NEGATIVE = "add_negative"
    DOWNSAMPLE_NEGATIVE = "downsample_negative"
    ADD_BOTH = "add_both"


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class DataSpec:
    """Recipe for one synthetic dataset; negatives = round(ratio * n_positive)."""

    n_positive: int
    ratio: float
    easy_negative_fraction: float = 0.9
    feature_dim: int = 2
    seed: int = 42
    jitter_sigma: float = 0.1

    def __post_init__(self):
        if self.n_positive < 1:
            raise ValueError("n_positive must be at least 1")
        if not (self.ratio > 0.0 and math.isfinite(self.ratio)):
            raise ValueError(f"ratio must be a positive real, got {self.ratio}")
        if not (0.0 <= self.easy_negative_fraction <= 1.0):
            raise ValueError("easy_negative_fraction must lie in [0, 1]")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.jitter_sigma < 0.0:
            raise ValueError("jitter_sigma must be nonnegative")

    @property
    def n_negative(self) -> int:
        return _round_half_up(self.ratio * self.n_positive)

    @property
    def n_total(self) -> int:
        return self.n_positive + self.n_negative


@dataclass
class LabeledBatch:
    """Feature matrix (n, d), 0/1 labels (n,), and stored per-class counts.

    counts is (n_negative, n_positive), indexable by class id. It is carried
    along explicitly so downstream code never has to rescan labels, and a
    recount() mismatch signals a broken transform.
    """

    features: np.ndarray
    labels: np.ndarray
    counts: tuple[int, int]

    @classmethod
    def from_arrays(cls, features: np.ndarray, labels: np.ndarray) -> "LabeledBatch":
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        if features.ndim != 2 or labels.ndim != 1 or features.shape[0] != labels.shape[0]:
            raise ValueError("features must be (n, d) aligned with (n,) labels")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0/1")
        n_pos = int(np.sum(labels == 1))
        return cls(features, labels, (labels.shape[0] - n_pos, n_pos))

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def n_positive(self) -> int:
        return self.counts[1]

    @property
    def n_negative(self) -> int:
        return self.counts[0]

    @property
    def positive_fraction(self) -> float:
        return self.counts[1] / self.n

    def recount(self) -> tuple[int, int]:
        n_pos = int(np.sum(self.labels == 1))
        return (self.labels.shape[0] - n_pos, n_pos)

    def copy(self) -> "LabeledBatch":
        return LabeledBatch(self.features.copy(), self.labels.copy(), self.counts)

    def one_hot_labels(self):
        from .losses import OneHotLabel

        return [OneHotLabel.from_class(int(c)) for c in self.labels]


def _fill_cluster(rng: Xoshiro256StarStar, out: np.ndarray, center: float) -> None:
    n, d = out.shape
    for i in range(n):
        for j in range(d):
            out[i, j] = center + CLUSTER_SIGMA * rng.normal()


def generate(spec: DataSpec) -> LabeledBatch:
    """Draw the dataset for a spec: positives, then easy negatives, then hard ones."""
    rng = Xoshiro256StarStar(spec.seed)
    n_pos = spec.n_positive
    n_neg = spec.n_negative
    n_easy = _round_half_up(spec.easy_negative_fraction * n_neg)
    n_hard = n_neg - n_easy
    d = spec.feature_dim

    features = np.empty((n_pos + n_neg, d), dtype=np.float64)
    _fill_cluster(rng, features[:n_pos], POSITIVE_CENTER)
    _fill_cluster(rng, features[n_pos : n_pos + n_easy], EASY_NEGATIVE_CENTER)
    _fill_cluster(rng, features[n_pos + n_easy :], HARD_NEGATIVE_CENTER)

    labels = np.zeros(n_pos + n_neg, dtype=np.int64)
    labels[:n_pos] = 1
    return LabeledBatch(features, labels, (n_neg, n_pos))


def _jittered_copies(
    rng: Xoshiro256StarStar,
    features: np.ndarray,
    source_rows: np.ndarray,
    n_add: int,
    jitter_sigma: float,
) -> np.ndarray:
    """Duplicate uniformly chosen template rows with Gaussian jitter."""
    d = features.shape[1]
    out = np.empty((n_add, d), dtype=np.float64)
    for i in range(n_add):
        template = features[source_rows[rng.randbelow(source_rows.shape[0])]]
        for j in range(d):
            out[i, j] = template[j] + jitter_sigma * rng.normal()
    return out


def _target_positive_count(target: float, n_negative: int) -> int:
    # n_pos / (n_pos + n_neg) = target  =>  n_pos = target/(1-target) * n_neg
    return _round_half_up(target / (1.0 - target) * n_negative)


def _target_negative_count(target: float, n_positive: int) -> int:
    return _round_half_up((1.0 - target) / target * n_positive)


def transform(
    batch: LabeledBatch,
    kind: TransformKind,
    target_fraction_positive: float = 0.5,
    seed: int = 0,
    jitter_sigma: float = 0.1,
    growth_factor: float = 1.5,
) -> LabeledBatch:
    """Rebalance a batch toward a target positive fraction (or grow it uniformly).

    add_positive / add_negative append jittered duplicates of the stated class
    until the fraction is within one example of the target; they never remove
    rows, so a target on the wrong side raises InfeasibleTransformError.
    downsample_negative removes random negatives instead. add_both ignores the
    target and appends jittered duplicates of both classes so the batch grows
    by growth_factor with the class fractions unchanged (up to rounding).
    The input batch is never mutated.
    """
    kind = TransformKind(kind)
    if batch.n == 0:
        raise ValueError("cannot transform an empty batch")
    if not (0.0 <= target_fraction_positive <= 1.0):
        raise ValueError("target_fraction_positive must lie in [0, 1]")
    if jitter_sigma < 0.0:
        raise ValueError("jitter_sigma must be nonnegative")

    if kind is TransformKind.ORIGINAL:
        return batch.copy()

    features = batch.features
    labels = batch.labels
    n_pos = batch.n_positive
    n_neg = batch.n_negative
    rng = Xoshiro256StarStar(seed)
    target = target_fraction_positive

    if kind is TransformKind.ADD_POSITIVE:
        if n_pos == 0:
            raise InfeasibleTransformError("no positive templates to duplicate")
        if target >= 1.0:
            if n_neg > 0:
                raise InfeasibleTransformError("cannot reach an all-positive batch by adding")
            return batch.copy()
        n_add = _target_positive_count(target, n_neg) - n_pos
        if n_add < 0:
            raise InfeasibleTransformError(
                f"positive fraction {batch.positive_fraction:.4f} already above target {target}"
            )
        new_rows = _jittered_copies(rng, features, np.flatnonzero(labels == 1), n_add, jitter_sigma)
        out_features = np.concatenate([features, new_rows])
        out_labels = np.concatenate([labels, np.ones(n_add, dtype=np.int64)])
        return LabeledBatch(out_features, out_labels, (n_neg, n_pos + n_add))

    if kind is TransformKind.ADD_NEGATIVE:
        if n_neg == 0:
            raise InfeasibleTransformError("no negative templates to duplicate")
        if target <= 0.0:
            if n_pos > 0:
                raise InfeasibleTransformError("cannot reach an all-negative batch by adding")
            return batch.copy()
        n_add = _target_negative_count(target, n_pos) - n_neg
        if n_add < 0:
            raise InfeasibleTransformError(
                f"positive fraction {batch.positive_fraction:.4f} already below target {target}"
            )
        new_rows = _jittered_copies(rng, features, np.flatnonzero(labels == 0), n_add, jitter_sigma)
        out_features = np.concatenate([features, new_rows])
        out_labels = np.concatenate([labels, np.zeros(n_add, dtype=np.int64)])
        return LabeledBatch(out_features, out_labels, (n_neg + n_add, n_pos))

    if kind is TransformKind.DOWNSAMPLE_NEGATIVE:
        if target <= 0.0:
            raise InfeasibleTransformError("downsampling negatives cannot lower the positive fraction")
        n_neg_target = 0 if target >= 1.0 else _target_negative_count(target, n_pos)
        n_remove = n_neg - n_neg_target
        if n_remove < 0:
            raise InfeasibleTransformError(
                f"positive fraction {batch.positive_fraction:.4f} already above target {target}"
            )
        # Partial Fisher-Yates over the negative positions; the first n_remove
        # entries after shuffling are dropped, everything else keeps its order.
        neg_positions = list(np.flatnonzero(labels == 0))
        for i in range(n_remove):
            j = i + rng.randbelow(len(neg_positions) - i)
            neg_positions[i], neg_positions[j] = neg_positions[j], neg_positions[i]
        keep = np.ones(batch.n, dtype=bool)
        keep[neg_positions[:n_remove]] = False
        return LabeledBatch(features[keep].copy(), labels[keep].copy(), (n_neg_target, n_pos))

    if kind is TransformKind.ADD_BOTH:
        if growth_factor < 1.0:
            raise InfeasibleTransformError("growth_factor must be at least 1")
        n_add_pos = _round_half_up((growth_factor - 1.0) * n_pos)
        n_add_neg = _round_half_up((growth_factor - 1.0) * n_neg)
        if (n_add_pos > 0 and n_pos == 0) or (n_add_neg > 0 and n_neg == 0):
            raise InfeasibleTransformError("cannot duplicate an absent class")
        pos_rows = _jittered_copies(rng, features, np.flatnonzero(labels == 1), n_add_pos, jitter_sigma)
        neg_rows = _jittered_copies(rng, features, np.flatnonzero(labels == 0), n_add_neg, jitter_sigma)
        out_features = np.concatenate([features, pos_rows, neg_rows])
        out_labels = np.concatenate(
            [labels, np.ones(n_add_pos, dtype=np.int64), np.zeros(n_add_neg, dtype=np.int64)]
        )
        return LabeledBatch(out_features, out_labels, (n_neg + n_add_neg, n_pos + n_add_pos))

    raise ValueError(f"unknown transform kind {kind!r}")


# ---------------------------------------------------------------------------
# CSV interface: header f0,...,f{d-1},label; floats use 9 significant digits.
# ---------------------------------------------------------------------------


def save_csv(batch: LabeledBatch, path) -> None:
    d = batch.features.shape[1]
    header = ",".join([f"f{j}" for j in range(d)] + ["label"])
    lines = [header]
    for i in range(batch.n):
        cells = [format(batch.features[i, j], ".9g") for j in range(d)]
        cells.append(str(int(batch.labels[i])))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_csv(path) -> LabeledBatch:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = lines[0].split(",")
    if header[-1] != "label" or any(h != f"f{j}" for j, h in enumerate(header[:-1])):
        raise ValueError(f"unexpected header {header!r}")
    d = len(header) - 1
    rows = []
    labels = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != d + 1:
            raise ValueError(f"row has {len(cells)} cells, expected {d + 1}")
        rows.append([float(c) for c in cells[:-1]])
        labels.append(int(cells[-1]))
    return LabeledBatch.from_arrays(np.array(rows, dtype=np.float64), np.array(labels))
