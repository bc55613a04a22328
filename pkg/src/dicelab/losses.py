"""Binary classification losses with closed-form gradients in the positive probability.

Seven interchangeable objectives: cross entropy, weighted cross entropy, a
squared-denominator per-sample dice loss, a batch-level (set) dice loss,
Tversky loss, a self-adjusting dice loss that down-weights easy examples, and
focal loss. Every loss exposes a value function and a separate analytic
gradient with respect to p1; p0 is always eliminated through p0 = 1 - p1.
Training therefore needs no autodiff, and the gradients stay auditable
against finite differences.

Value/gradient functions accept floats or numpy arrays interchangeably. The
typed wrappers (ProbPair / OneHotLabel in, LossValueGrad out) validate their
inputs and are the reference scalar interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

# Probabilities are clamped to [PROB_EPS, 1 - PROB_EPS] before any logarithm.
# Dice-family losses are rational in p1 and are never clamped.
PROB_EPS = 1e-7


class SingularInputError(ValueError):
    """A dice-family denominator is zero; only reachable with gamma = 0."""


class LossKind(str, Enum):
    CE = "CE"
    WCE = "WCE"
    DL_SAMPLE = "DL_sample"
    DL_SET = "DL_set"
    TL = "TL"
    DSC_SELFADJ = "DSC_selfadj"
    FL = "FL"


#: Kinds whose per-example weight comes from class frequencies.
WEIGHTED_KINDS = frozenset({LossKind.WCE, LossKind.FL})

#: Kinds defined through a soft overlap ratio; values always lie in [0, 1].
DICE_FAMILY = frozenset(
    {LossKind.DL_SAMPLE, LossKind.DL_SET, LossKind.TL, LossKind.DSC_SELFADJ}
)


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ProbPair:
    """Predicted class distribution (p0, p1) over {negative, positive}."""

    p0: float
    p1: float

    def __post_init__(self):
        _require_finite("p0", self.p0)
        _require_finite("p1", self.p1)
        if not (0.0 <= self.p0 <= 1.0 and 0.0 <= self.p1 <= 1.0):
            raise ValueError(f"probabilities must lie in [0, 1], got ({self.p0}, {self.p1})")
        if abs(self.p0 + self.p1 - 1.0) > 1e-12:
            raise ValueError(f"p0 + p1 must equal 1 within 1e-12, got {self.p0 + self.p1}")

    @classmethod
    def from_p1(cls, p1: float) -> "ProbPair":
        return cls(1.0 - p1, p1)


@dataclass(frozen=True)
class OneHotLabel:
    """Gold label as a one-hot pair (y0, y1)."""

    y0: int
    y1: int

    def __post_init__(self):
        if self.y0 not in (0, 1) or self.y1 not in (0, 1) or self.y0 + self.y1 != 1:
            raise ValueError(f"label must be one-hot over two classes, got ({self.y0}, {self.y1})")

    @classmethod
    def from_class(cls, label: int) -> "OneHotLabel":
        if label not in (0, 1):
            raise ValueError(f"class must be 0 or 1, got {label!r}")
        return cls(1 - label, label)


NEGATIVE = OneHotLabel(1, 0)
POSITIVE = OneHotLabel(0, 1)


@dataclass(frozen=True)
class LossSpec:
    """Loss selector plus hyperparameters.

    alpha/beta/gamma default per kind when left as None: Tversky gets
    alpha = beta = 0.5 (the plain dice point), the self-adjusting decay
    exponent defaults to 1, the dice-family smoothing gamma defaults to 1,
    and the focal focusing exponent defaults to 2. `gamma` is the smoothing
    constant for the dice family but the focusing exponent for FL; the two
    roles never coexist in one loss. `k` only matters for WCE/FL class
    weights and `detach_weight` only for DSC_selfadj gradients: when True
    (the default) the confidence-decay factor is held constant during
    differentiation, which keeps the per-sample push monotone in p1 and is
    the mode that actually trains; set it False to get the exact derivative
    of the loss value (the mode finite differences can confirm).
    """

    kind: LossKind
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    k: float = 1.0
    detach_weight: bool = True

    def __post_init__(self):
        kind = LossKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.alpha is None:
            object.__setattr__(self, "alpha", 0.5 if kind is LossKind.TL else 1.0)
        if self.beta is None:
            object.__setattr__(self, "beta", 0.5 if kind is LossKind.TL else 1.0)
        if self.gamma is None:
            object.__setattr__(self, "gamma", 2.0 if kind is LossKind.FL else 1.0)
        for name in ("alpha", "beta", "gamma", "k"):
            _require_finite(name, getattr(self, name))
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if self.k <= 0.0:
            raise ValueError("k must be positive")


@dataclass(frozen=True)
class LossValueGrad:
    """Scalar loss value and its derivative with respect to p1."""

    value: float
    dvalue_dp1: float


@dataclass(frozen=True)
class BatchLossValueGrad:
    """Batch loss value and the gradient of that value w.r.t. every p1 in the batch."""

    value: float
    dvalue_dp1: np.ndarray


# ---------------------------------------------------------------------------
# Elementwise value / gradient cores (floats or arrays).
# ---------------------------------------------------------------------------


def clamp_probability(p):
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def cross_entropy_value(p1, y1):
    p1c = clamp_probability(p1)
    return -(y1 * np.log(p1c) + (1.0 - y1) * np.log(1.0 - p1c))


def cross_entropy_grad(p1, y1):
    p1c = clamp_probability(p1)
    return -y1 / p1c + (1.0 - y1) / (1.0 - p1c)


def _check_dice_denominator(den) -> None:
    bad = np.asarray(den <= 0.0)
    if bad.any():
        index = int(np.argmax(bad))
        raise SingularInputError(
            f"dice-family denominator is zero at element {index}; "
            "gamma = 0 requires a nonempty soft overlap"
        )


def soft_dice_coefficient(p1, y1, gamma):
    """Per-sample soft dice (2*p1*y1 + gamma) / (p1 + y1 + gamma)."""
    num = 2.0 * p1 * y1 + gamma
    den = p1 + y1 + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return num / den


def dice_value(p1, y1, gamma):
    """Squared-denominator per-sample dice loss 1 - (2*p1*y1 + g) / (p1^2 + y1^2 + g)."""
    num = 2.0 * p1 * y1 + gamma
    den = p1 * p1 + y1 * y1 + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return 1.0 - num / den


def dice_grad(p1, y1, gamma):
    num = 2.0 * p1 * y1 + gamma
    den = p1 * p1 + y1 * y1 + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return -2.0 * (y1 * den - p1 * num) / (den * den)


def set_dice_value(p1, y1, gamma):
    """Batch-level dice loss over soft sets: 1 - (2*sum(p*y) + g) / (sum(p^2) + sum(y^2) + g)."""
    p1 = np.asarray(p1, dtype=np.float64)
    y1 = np.asarray(y1, dtype=np.float64)
    num = 2.0 * np.sum(p1 * y1) + gamma
    den = np.sum(p1 * p1) + np.sum(y1 * y1) + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return float(1.0 - num / den)


def set_dice_grads(p1, y1, gamma) -> np.ndarray:
    """Gradient of set_dice_value w.r.t. each p1; every entry shares the batch denominator."""
    p1 = np.asarray(p1, dtype=np.float64)
    y1 = np.asarray(y1, dtype=np.float64)
    num = 2.0 * np.sum(p1 * y1) + gamma
    den = np.sum(p1 * p1) + np.sum(y1 * y1) + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return -2.0 * (y1 * den - p1 * num) / (den * den)


def tversky_value(p1, y1, alpha, beta, gamma):
    """Tversky loss; alpha prices false positives, beta false negatives.

    alpha = beta = 0.5 with gamma = 0 recovers the unsmoothed dice loss.
    """
    y0 = 1.0 - y1
    p0 = 1.0 - p1
    num = p1 * y1 + gamma
    den = p1 * y1 + alpha * p1 * y0 + beta * p0 * y1 + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return 1.0 - num / den


def tversky_grad(p1, y1, alpha, beta, gamma):
    y0 = 1.0 - y1
    p0 = 1.0 - p1
    num = p1 * y1 + gamma
    den = p1 * y1 + alpha * p1 * y0 + beta * p0 * y1 + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    dden = y1 + alpha * y0 - beta * y1
    return -(y1 * den - num * dden) / (den * den)


def self_adjusting_dice_value(p1, y1, alpha, gamma):
    """Self-adjusting dice: p1 is replaced by (1 - p1)**alpha * p1.

    The factor (1 - p1)**alpha shrinks the effective probability mass of
    confidently-positive predictions, so already-easy examples stop moving
    the objective. alpha = 0 turns the weight off and recovers
    1 - soft_dice_coefficient.
    """
    u = (1.0 - p1) ** alpha * p1
    num = 2.0 * u * y1 + gamma
    den = u + y1 + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return 1.0 - num / den


def self_adjusting_dice_grad(p1, y1, alpha, gamma, detach_weight=False):
    """Gradient of the self-adjusting dice value.

    With detach_weight the decay factor is treated as a constant (its own
    derivative is dropped), mirroring a stop-gradient on the weight. The
    value is identical either way; only this gradient changes.
    """
    w = (1.0 - p1) ** alpha
    u = w * p1
    if detach_weight or alpha == 0.0:
        du = w
    else:
        du = w - alpha * (1.0 - p1) ** (alpha - 1.0) * p1
    num = 2.0 * u * y1 + gamma
    den = u + y1 + gamma
    if gamma == 0.0:
        _check_dice_denominator(den)
    return -(2.0 * du * y1 * den - num * du) / (den * den)


def focal_value(p1, y1, gamma_focus, weight):
    """Focal loss -weight * (1 - p_true)**gamma_focus * log(p_true)."""
    p1c = clamp_probability(p1)
    p_true = y1 * p1c + (1.0 - y1) * (1.0 - p1c)
    return -weight * (1.0 - p_true) ** gamma_focus * np.log(p_true)


def focal_grad(p1, y1, gamma_focus, weight):
    p1c = clamp_probability(p1)
    p_true = y1 * p1c + (1.0 - y1) * (1.0 - p1c)
    one_minus = 1.0 - p_true
    d_dptrue = (
        weight * gamma_focus * one_minus ** (gamma_focus - 1.0) * np.log(p_true)
        - weight * one_minus ** gamma_focus / p_true
    )
    sign = 2.0 * y1 - 1.0  # dp_true/dp1 is +1 for positives, -1 for negatives
    return sign * d_dptrue


def class_weight_coefficient(n_total: int, n_class: int, k: float, base: float = 10.0) -> float:
    """Frequency-derived class weight log_base((n_total - n_class) / n_class + k).

    Rare classes get large weights; with k = 1 a balanced class gets
    log10(2) ~= 0.301. The log base is configurable but defaults to 10.
    """
    if not (0 < n_class <= n_total):
        raise ValueError(f"need 0 < n_class <= n_total, got {n_class} of {n_total}")
    argument = (n_total - n_class) / n_class + k
    if argument <= 0.0:
        raise ValueError(f"log argument must be positive, got {argument}")
    if base == 10.0:
        return math.log10(argument)
    if base <= 0.0 or base == 1.0:
        raise ValueError(f"invalid log base {base}")
    return math.log(argument) / math.log(base)


# ---------------------------------------------------------------------------
# Typed scalar interface.
# ---------------------------------------------------------------------------


def cross_entropy_loss(p: ProbPair, y: OneHotLabel) -> LossValueGrad:
    """Negative log likelihood of the gold class, clamped before the log."""
    return LossValueGrad(
        float(cross_entropy_value(p.p1, y.y1)),
        float(cross_entropy_grad(p.p1, y.y1)),
    )


def weighted_cross_entropy_loss(p: ProbPair, y: OneHotLabel, class_weight: float) -> LossValueGrad:
    """Cross entropy scaled by the (nonnegative) weight of the gold class."""
    _require_finite("class_weight", class_weight)
    if class_weight < 0.0:
        raise ValueError(f"class_weight must be nonnegative, got {class_weight}")
    return LossValueGrad(
        float(class_weight * cross_entropy_value(p.p1, y.y1)),
        float(class_weight * cross_entropy_grad(p.p1, y.y1)),
    )


def _check_gamma(gamma: float) -> None:
    _require_finite("gamma", gamma)
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")


def dice_coefficient_sample(p: ProbPair, y: OneHotLabel, gamma: float = 1.0) -> float:
    """Per-sample soft dice coefficient (a similarity, not a loss)."""
    _check_gamma(gamma)
    return float(soft_dice_coefficient(p.p1, y.y1, gamma))


def dice_loss(p: ProbPair, y: OneHotLabel, gamma: float = 1.0) -> LossValueGrad:
    """Per-sample dice loss with squared-denominator smoothing."""
    _check_gamma(gamma)
    return LossValueGrad(
        float(dice_value(p.p1, y.y1, gamma)),
        float(dice_grad(p.p1, y.y1, gamma)),
    )


def set_dice_loss(ps: list[ProbPair], ys: list[OneHotLabel], gamma: float = 1.0) -> BatchLossValueGrad:
    """Dice loss over a whole batch treated as one soft set."""
    _check_gamma(gamma)
    if len(ps) == 0:
        raise ValueError("set dice needs a nonempty batch")
    if len(ps) != len(ys):
        raise ValueError(f"batch size mismatch: {len(ps)} probabilities, {len(ys)} labels")
    p1 = np.array([p.p1 for p in ps], dtype=np.float64)
    y1 = np.array([y.y1 for y in ys], dtype=np.float64)
    return BatchLossValueGrad(set_dice_value(p1, y1, gamma), set_dice_grads(p1, y1, gamma))


def tversky_loss(
    p: ProbPair, y: OneHotLabel, alpha: float = 0.5, beta: float = 0.5, gamma: float = 1.0
) -> LossValueGrad:
    """Tversky loss with asymmetric false-positive / false-negative pricing."""
    _check_gamma(gamma)
    for name, v in (("alpha", alpha), ("beta", beta)):
        _require_finite(name, v)
        if v < 0.0:
            raise ValueError(f"{name} must be nonnegative, got {v}")
    return LossValueGrad(
        float(tversky_value(p.p1, y.y1, alpha, beta, gamma)),
        float(tversky_grad(p.p1, y.y1, alpha, beta, gamma)),
    )


def self_adjusting_dice_loss(
    p: ProbPair,
    y: OneHotLabel,
    alpha: float = 1.0,
    gamma: float = 1.0,
    detach_weight: bool = True,
) -> LossValueGrad:
    """Dice loss with the confidence-decay reweighting of p1."""
    _check_gamma(gamma)
    _require_finite("alpha", alpha)
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    return LossValueGrad(
        float(self_adjusting_dice_value(p.p1, y.y1, alpha, gamma)),
        float(self_adjusting_dice_grad(p.p1, y.y1, alpha, gamma, detach_weight)),
    )


def focal_loss(
    p: ProbPair, y: OneHotLabel, gamma_focus: float = 2.0, class_weight: float = 1.0
) -> LossValueGrad:
    """Cross entropy with the (1 - p_true)**gamma_focus modulating factor."""
    _require_finite("gamma_focus", gamma_focus)
    _require_finite("class_weight", class_weight)
    if gamma_focus < 0.0:
        raise ValueError(f"gamma_focus must be nonnegative, got {gamma_focus}")
    if class_weight < 0.0:
        raise ValueError(f"class_weight must be nonnegative, got {class_weight}")
    return LossValueGrad(
        float(focal_value(p.p1, y.y1, gamma_focus, class_weight)),
        float(focal_grad(p.p1, y.y1, gamma_focus, class_weight)),
    )


# ---------------------------------------------------------------------------
# Dispatch over LossSpec.
# ---------------------------------------------------------------------------


def sample_value(spec: LossSpec, p1, y1, class_weight=1.0):
    """Per-sample loss value for any kind with a per-sample form."""
    kind = spec.kind
    if kind is LossKind.CE:
        return cross_entropy_value(p1, y1)
    if kind is LossKind.WCE:
        return class_weight * cross_entropy_value(p1, y1)
    if kind is LossKind.DL_SAMPLE:
        return dice_value(p1, y1, spec.gamma)
    if kind is LossKind.TL:
        return tversky_value(p1, y1, spec.alpha, spec.beta, spec.gamma)
    if kind is LossKind.DSC_SELFADJ:
        return self_adjusting_dice_value(p1, y1, spec.alpha, spec.gamma)
    if kind is LossKind.FL:
        return focal_value(p1, y1, spec.gamma, class_weight)
    raise ValueError(f"{kind.value} has no per-sample form")


def sample_grad(spec: LossSpec, p1, y1, class_weight=1.0):
    """Analytic d(value)/d(p1) matching sample_value."""
    kind = spec.kind
    if kind is LossKind.CE:
        return cross_entropy_grad(p1, y1)
    if kind is LossKind.WCE:
        return class_weight * cross_entropy_grad(p1, y1)
    if kind is LossKind.DL_SAMPLE:
        return dice_grad(p1, y1, spec.gamma)
    if kind is LossKind.TL:
        return tversky_grad(p1, y1, spec.alpha, spec.beta, spec.gamma)
    if kind is LossKind.DSC_SELFADJ:
        return self_adjusting_dice_grad(p1, y1, spec.alpha, spec.gamma, spec.detach_weight)
    if kind is LossKind.FL:
        return focal_grad(p1, y1, spec.gamma, class_weight)
    raise ValueError(f"{kind.value} has no per-sample form")


def batch_value_grad(
    spec: LossSpec,
    p1: np.ndarray,
    y1: np.ndarray,
    class_weights: tuple[float, float] | None = None,
) -> tuple[float, np.ndarray]:
    """Batch loss value and its gradient w.r.t. each p1, on raw arrays.

    For per-sample kinds the value is the arithmetic mean and the gradients
    are the per-sample gradients divided by the batch size, so the pair is
    always (L, dL/dp1_i) for the single scalar L the trainer descends.
    DL_set is evaluated on the whole batch as one soft set.
    """
    p1 = np.asarray(p1, dtype=np.float64)
    y1 = np.asarray(y1, dtype=np.float64)
    n = p1.shape[0]
    if n == 0:
        raise ValueError("batch must be nonempty")
    if spec.kind in WEIGHTED_KINDS:
        if class_weights is None:
            raise ValueError(f"{spec.kind.value} requires class_weights")
        w0, w1 = class_weights
        if w0 < 0.0 or w1 < 0.0:
            raise ValueError("class weights must be nonnegative")
        weights = np.where(y1 == 1.0, w1, w0)
    else:
        if class_weights is not None:
            raise ValueError(f"{spec.kind.value} does not take class_weights")
        weights = 1.0
    if spec.kind is LossKind.DL_SET:
        return set_dice_value(p1, y1, spec.gamma), set_dice_grads(p1, y1, spec.gamma)
    values = sample_value(spec, p1, y1, weights)
    grads = sample_grad(spec, p1, y1, weights)
    return float(np.mean(values)), grads / n


def batch_mean_loss(
    spec: LossSpec,
    ps: list[ProbPair],
    ys: list[OneHotLabel],
    class_weights: tuple[float, float] | None = None,
) -> BatchLossValueGrad:
    """Typed batch reduction: mean per-sample loss, or the set loss for DL_set."""
    if len(ps) == 0:
        raise ValueError("batch must be nonempty")
    if len(ps) != len(ys):
        raise ValueError(f"batch size mismatch: {len(ps)} probabilities, {len(ys)} labels")
    p1 = np.array([p.p1 for p in ps], dtype=np.float64)
    y1 = np.array([y.y1 for y in ys], dtype=np.float64)
    value, grads = batch_value_grad(spec, p1, y1, class_weights)
    return BatchLossValueGrad(value, grads)
