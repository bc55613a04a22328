"""SGD trainer: forward pass, analytic parameter gradients, determinism."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from dicelab.data import DataSpec, LabeledBatch, generate
from dicelab.losses import LossKind, LossSpec
from dicelab.rng import Xoshiro256StarStar
from dicelab.trainer import (
    ModelSpec,
    TrainedModel,
    TrainingDivergedError,
    TrainSpec,
    compute_class_weights,
    evaluate,
    forward,
    forward_p1,
    initial_parameters,
    loss_and_param_grad,
    model_from_dict,
    model_to_dict,
    parameter_count,
    train,
)

ALL_KINDS = list(LossKind)


def _make_linear(params, input_dim=2) -> TrainedModel:
    return TrainedModel(np.array(params, dtype=np.float64), ModelSpec(), input_dim)


def _spec_with_true_gradient(kind: LossKind) -> LossSpec:
    return LossSpec(kind, detach_weight=False)


def _class_weights_for(kind: LossKind, labels: np.ndarray, k: float = 1.0):
    if kind in (LossKind.WCE, LossKind.FL):
        return compute_class_weights(labels, k)
    return None


# --- specs ------------------------------------------------------------------


def test_parameter_count_per_architecture():
    assert parameter_count(ModelSpec(), 2) == 3
    assert parameter_count(ModelSpec(), 5) == 6
    assert parameter_count(ModelSpec(arch="mlp", hidden_units=4), 2) == 17
    with pytest.raises(ValueError):
        parameter_count(ModelSpec(), 0)


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(arch="cnn")
    with pytest.raises(ValueError):
        ModelSpec(arch="mlp", hidden_units=0)
    with pytest.raises(ValueError):
        ModelSpec(activation="relu")


def test_train_spec_validation_allows_zero_epochs():
    assert TrainSpec(epochs=0).epochs == 0
    with pytest.raises(ValueError):
        TrainSpec(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainSpec(epochs=-1)
    with pytest.raises(ValueError):
        TrainSpec(batch_size=0)
    with pytest.raises(ValueError):
        TrainSpec(seed=-1)
    with pytest.raises(ValueError):
        TrainSpec(init_scale=0.0)


# --- forward pass -----------------------------------------------------------


def test_linear_forward_is_sigmoid_of_affine_score():
    model = _make_linear([1.0, 0.0, 0.0])
    got = forward(model, [2.0, 0.0])
    assert got.p1 == pytest.approx(0.8807970779778823, rel=1e-12)
    assert got.p0 == pytest.approx(1.0 - 0.8807970779778823, rel=1e-12)
    assert forward(_make_linear([0.0, 0.0, 0.0]), [3.0, -1.0]).p1 == 0.5


def test_forward_p1_saturates_without_overflowing():
    model = _make_linear([1000.0, 0.0, 0.0])
    p1 = forward_p1(model, np.array([[1e6, 0.0], [-1e6, 0.0]]))
    assert p1[0] == 1.0  # exp underflow rounds to exactly 1 within float64
    assert 0.0 < p1[1] < 1e-300  # the mirrored side stays strictly positive
    assert np.isfinite(p1).all()


def test_forward_validates_dimensions():
    model = _make_linear([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        forward(model, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        forward_p1(model, np.zeros((4, 3)))
    with pytest.raises(ValueError):
        TrainedModel(np.zeros(4), ModelSpec(), 2)  # wrong parameter count


def test_initial_parameters_come_from_the_seeded_stream():
    spec = TrainSpec(seed=9, init_scale=0.25)
    got = initial_parameters(ModelSpec(), 2, spec)
    rng = Xoshiro256StarStar(9)
    expected = np.array([0.25 * rng.normal() for _ in range(3)])
    assert np.array_equal(got, expected)


# --- analytic parameter gradients vs finite differences ----------------------


@pytest.mark.parametrize("kind", ALL_KINDS, ids=[k.value for k in ALL_KINDS])
def test_parameter_gradient_matches_finite_differences(kind):
    data = generate(DataSpec(n_positive=4, ratio=1.0, seed=3))
    x, y1 = data.features, data.labels.astype(np.float64)
    spec = _spec_with_true_gradient(kind)
    weights = _class_weights_for(kind, data.labels)
    params = initial_parameters(ModelSpec(), 2, TrainSpec(seed=0))
    _, grad = loss_and_param_grad(params, ModelSpec(), x, y1, spec, weights)
    h = 1e-6
    for j in range(params.shape[0]):
        moved = params.copy()
        moved[j] = params[j] + h
        hi = loss_and_param_grad(moved, ModelSpec(), x, y1, spec, weights)[0]
        moved[j] = params[j] - h
        lo = loss_and_param_grad(moved, ModelSpec(), x, y1, spec, weights)[0]
        estimate = (hi - lo) / (2.0 * h)
        assert grad[j] == pytest.approx(estimate, rel=1e-4, abs=1e-8), f"parameter {j}"


def test_mlp_parameter_gradient_matches_finite_differences():
    data = generate(DataSpec(n_positive=4, ratio=1.0, seed=3))
    x, y1 = data.features, data.labels.astype(np.float64)
    model_spec = ModelSpec(arch="mlp", hidden_units=3)
    spec = LossSpec(LossKind.CE)
    params = initial_parameters(model_spec, 2, TrainSpec(seed=1))
    _, grad = loss_and_param_grad(params, model_spec, x, y1, spec, None)
    h = 1e-6
    for j in range(params.shape[0]):
        moved = params.copy()
        moved[j] = params[j] + h
        hi = loss_and_param_grad(moved, model_spec, x, y1, spec, None)[0]
        moved[j] = params[j] - h
        lo = loss_and_param_grad(moved, model_spec, x, y1, spec, None)[0]
        assert grad[j] == pytest.approx((hi - lo) / (2.0 * h), rel=1e-4, abs=1e-8)


def test_detached_gradient_deliberately_departs_from_value_derivative():
    data = generate(DataSpec(n_positive=4, ratio=1.0, seed=3))
    x, y1 = data.features, data.labels.astype(np.float64)
    spec = LossSpec(LossKind.DSC_SELFADJ)  # default: decay factor detached
    params = initial_parameters(ModelSpec(), 2, TrainSpec(seed=0))
    _, grad = loss_and_param_grad(params, ModelSpec(), x, y1, spec, None)
    h = 1e-6
    rel = 0.0
    for j in range(params.shape[0]):
        moved = params.copy()
        moved[j] = params[j] + h
        hi = loss_and_param_grad(moved, ModelSpec(), x, y1, spec, None)[0]
        moved[j] = params[j] - h
        lo = loss_and_param_grad(moved, ModelSpec(), x, y1, spec, None)[0]
        estimate = (hi - lo) / (2.0 * h)
        rel = max(rel, abs(grad[j] - estimate) / max(abs(grad[j]), abs(estimate), 1e-12))
    assert rel > 0.01


# --- training ---------------------------------------------------------------


def test_zero_epochs_returns_the_initialization():
    data = generate(DataSpec(n_positive=10, ratio=1.0, seed=2))
    train_spec = TrainSpec(epochs=0, seed=5)
    model = train(data, LossSpec(LossKind.CE), train_spec=train_spec)
    assert np.array_equal(model.parameters, initial_parameters(ModelSpec(), 2, train_spec))
    assert model.train_history == []


def test_training_is_bitwise_deterministic():
    data = generate(DataSpec(n_positive=20, ratio=2.0, seed=8))
    spec = LossSpec(LossKind.CE)
    train_spec = TrainSpec(epochs=5, batch_size=16, seed=4)
    a = train(data, spec, train_spec=train_spec)
    b = train(data, spec, train_spec=train_spec)
    assert np.array_equal(a.parameters, b.parameters)
    assert a.train_history == b.train_history
    c = train(data, spec, train_spec=TrainSpec(epochs=5, batch_size=16, seed=6))
    assert not np.array_equal(a.parameters, c.parameters)


def test_history_has_one_entry_per_epoch_with_sane_values():
    data = generate(DataSpec(n_positive=15, ratio=1.0, seed=1))
    model = train(data, LossSpec(LossKind.CE), train_spec=TrainSpec(epochs=7, batch_size=8))
    assert len(model.train_history) == 7
    for loss_value, f1 in model.train_history:
        assert math.isfinite(loss_value)
        assert 0.0 <= f1 <= 1.0


@pytest.mark.parametrize("kind", ALL_KINDS, ids=[k.value for k in ALL_KINDS])
def test_loss_descends_within_ten_epochs(kind):
    # Descent of the recorded value is only guaranteed when the update direction
    # is its true derivative; the detached self-adjusting default deliberately
    # optimizes a surrogate, so pin detach_weight=False here.
    data = generate(DataSpec(n_positive=40, ratio=1.0, easy_negative_fraction=1.0, seed=11))
    train_spec = TrainSpec(learning_rate=0.01, epochs=10, batch_size=16, seed=2)
    model = train(data, _spec_with_true_gradient(kind), train_spec=train_spec)
    assert model.train_history[9][0] < model.train_history[0][0]


def test_detached_self_adjusting_default_improves_f1():
    # The detached gradient is not the value's derivative, so the value need
    # not descend -- but the classifier it trains must still get better.
    data = generate(DataSpec(n_positive=40, ratio=1.0, easy_negative_fraction=1.0, seed=11))
    train_spec = TrainSpec(learning_rate=0.1, epochs=30, batch_size=16, seed=2)
    model = train(data, LossSpec(LossKind.DSC_SELFADJ), train_spec=train_spec)
    assert model.train_history[0][1] < 0.5
    assert model.train_history[-1][1] == 1.0


def test_cross_entropy_masters_separable_balanced_data():
    data = generate(DataSpec(n_positive=40, ratio=1.0, easy_negative_fraction=1.0, seed=11))
    model = train(data, LossSpec(LossKind.CE), train_spec=TrainSpec(epochs=60, batch_size=16))
    assert evaluate(model, data).f1 >= 0.99


def test_non_finite_features_abort_training():
    data = generate(DataSpec(n_positive=10, ratio=1.0, seed=2))
    data.features[0, 0] = float("nan")
    with pytest.raises(TrainingDivergedError, match="epoch 0"):
        train(data, LossSpec(LossKind.CE), train_spec=TrainSpec(epochs=1))


def test_training_rejects_empty_data():
    empty = LabeledBatch.from_arrays(np.zeros((0, 2)), np.array([], dtype=np.int64))
    with pytest.raises(ValueError):
        train(empty, LossSpec(LossKind.CE))


def test_weighted_kinds_use_frequency_weights_from_the_training_labels():
    labels = np.array([0] * 80 + [1] * 20)
    w0, w1 = compute_class_weights(labels, 1.0)
    assert w0 == pytest.approx(math.log10(1.25), rel=1e-12)
    assert w1 == pytest.approx(math.log10(5.0), rel=1e-12)


# --- evaluation -------------------------------------------------------------


def test_evaluate_thresholds_strictly():
    model = _make_linear([0.0, 0.0, 0.0])  # p1 is exactly 0.5 everywhere
    data = LabeledBatch.from_arrays(np.zeros((4, 2)), np.array([1, 1, 0, 0]))
    at_half = evaluate(model, data, threshold=0.5)
    assert at_half.recall == 0.0  # 0.5 > 0.5 is false: everything negative
    below = evaluate(model, data, threshold=0.4)
    assert below.recall == 1.0
    with pytest.raises(ValueError):
        evaluate(model, data, threshold=0.0)
    with pytest.raises(ValueError):
        evaluate(model, data, threshold=1.0)


# --- serialization ----------------------------------------------------------


def test_model_json_round_trip():
    data = generate(DataSpec(n_positive=10, ratio=1.0, seed=2))
    model = train(data, LossSpec(LossKind.CE), train_spec=TrainSpec(epochs=3, batch_size=8))
    payload = json.loads(json.dumps(model_to_dict(model)))
    back = model_from_dict(payload)
    assert np.array_equal(back.parameters, model.parameters)
    assert back.model_spec == model.model_spec
    assert back.input_dim == model.input_dim
    assert back.train_history == model.train_history


def test_model_json_round_trip_mlp():
    spec = ModelSpec(arch="mlp", hidden_units=3)
    params = initial_parameters(spec, 2, TrainSpec(seed=1))
    model = TrainedModel(params, spec, 2)
    back = model_from_dict(model_to_dict(model))
    assert np.array_equal(back.parameters, model.parameters)
    assert back.model_spec == spec


def test_model_from_dict_rejects_inconsistent_payloads():
    with pytest.raises(ValueError):
        model_from_dict({"arch": "mlp", "hidden_units": 3, "parameters": [0.0] * 12})
    with pytest.raises(ValueError):
        model_from_dict({"arch": "linear", "hidden_units": 16, "parameters": [0.0]})
