"""Functional layers, optimizers, gradient checks and checkpoints"""
import numpy as np
import pytest
import torch

from pyseld.exceptions import AlignmentError, CheckpointFormatError, DataError, PreconditionError, ShapeError
from pyseld.nn import (
    OptimizerState,
    ParamSet,
    adamw_step,
    batch_norm2d,
    bigru,
    check_aligned,
    conv2d,
    grad_check,
    linear,
    max_pool2d,
    mse_loss,
    read_checkpoint,
    sgd_step,
    step_decay,
    write_checkpoint,
)


def _params(**tensors) -> ParamSet:
    return ParamSet(tensors, {name: idx for idx, name in enumerate(tensors, start=1)})


def test_paramset_layers():

    params = ParamSet(
        {"a": torch.ones(2), "b": torch.zeros(3), "c": torch.ones(1)},
        {"a": 1, "b": 1, "c": 2},
    )

    assert params.p == 2
    assert params.numel() == 6
    assert params.layer(1) == ["a", "b"]

    scaled = params.scale(torch.tensor([0.5, 2.0]))
    assert torch.equal(scaled["a"], torch.full((2,), 0.5))
    assert torch.equal(scaled["c"], torch.full((1,), 2.0))

    with pytest.raises(AlignmentError):
        params.scale(torch.ones(3))


def test_paramset_validation():

    with pytest.raises(DataError):
        ParamSet({"a": torch.ones(1)}, {})

    with pytest.raises(DataError):
        ParamSet({"a": torch.ones(1), "b": torch.ones(1)}, {"a": 1, "b": 3})

    params = _params(a=torch.ones(2))
    with pytest.raises(AlignmentError):
        params.with_tensors([torch.ones(3)])


def test_paramset_copies_are_independent():

    params = _params(a=torch.ones(2))
    leaves = params.leaves()

    assert leaves["a"].requires_grad and not params["a"].requires_grad
    assert params.clone().equal(params)
    assert params.clone()["a"] is not params["a"]


def test_check_aligned():

    params = _params(a=torch.ones(2), b=torch.ones(3))

    assert len(check_aligned(params, {"b": torch.ones(3), "a": torch.ones(2)})) == 2

    with pytest.raises(AlignmentError):
        check_aligned(params, {"a": torch.ones(2)})

    with pytest.raises(AlignmentError):
        check_aligned(params, [torch.ones(2), torch.ones(4)])


def test_sgd_step():

    params = _params(theta=torch.tensor([1.0]))
    updated = sgd_step(params, [torch.tensor([2.0])], lr=0.1)

    assert updated["theta"].item() == pytest.approx(0.8)
    assert params["theta"].item() == 1.0


def test_sgd_zero_lr_is_identity():

    params = _params(theta=torch.randn(4, 3))
    assert sgd_step(params, [torch.randn(4, 3)], lr=0.0).equal(params)


def test_sgd_steps_compose():

    params = _params(theta=torch.randn(5, dtype=torch.float64))
    grad = torch.randn(5, dtype=torch.float64)

    twice = sgd_step(sgd_step(params, [grad], 0.1), [grad], 0.1)
    once = sgd_step(params, [2 * grad], 0.1)

    assert torch.allclose(twice["theta"], once["theta"], atol=1e-12)


def test_adamw_first_step():

    params = _params(theta=torch.tensor([0.5, -1.0], dtype=torch.float64))
    state = OptimizerState(lr=1e-3, weight_decay=0.0)

    updated, state = adamw_step(params, [torch.ones(2, dtype=torch.float64)], state)

    # m_hat = v_hat = 1 on the first step
    expected = params["theta"] - 1e-3 * 1 / (1 + 1e-8)
    assert torch.allclose(updated["theta"], expected, atol=1e-15)
    assert state.step == 1


def test_adamw_matches_reference():

    theta = torch.tensor([0.3, -0.2, 1.1], dtype=torch.float64)
    params = _params(theta=theta)
    state = OptimizerState(lr=1e-2, weight_decay=0.05)

    m = v = torch.zeros(3, dtype=torch.float64)
    for step in range(1, 4):

        grad = torch.tensor([0.1, -0.4, 0.2], dtype=torch.float64) * step
        params, state = adamw_step(params, [grad], state)

        m = 0.9 * m + 0.1 * grad
        v = 0.999 * v + 0.001 * grad**2
        theta = theta * (1 - 1e-2 * 0.05)
        theta = theta - 1e-2 * (m / (1 - 0.9**step)) / (torch.sqrt(v / (1 - 0.999**step)) + 1e-8)

    assert torch.allclose(params["theta"], theta, atol=1e-14)


def test_adamw_zero_grads():

    params = _params(theta=torch.tensor([2.0], dtype=torch.float64))
    zero = [torch.zeros(1, dtype=torch.float64)]

    unchanged, _ = adamw_step(params, zero, OptimizerState(weight_decay=0.0))
    assert unchanged["theta"].item() == 2.0

    decayed, _ = adamw_step(params, zero, OptimizerState(lr=1e-3, weight_decay=0.01))
    assert decayed["theta"].item() == pytest.approx(2.0 - 1e-3 * 0.01 * 2.0)


def test_adamw_state_checks():

    params = _params(theta=torch.ones(2))

    with pytest.raises(PreconditionError):
        adamw_step(params, [torch.ones(2)], OptimizerState(kind="sgd"))

    stale = OptimizerState(exp_avg={"theta": torch.ones(3)}, exp_avg_sq={"theta": torch.ones(3)})
    with pytest.raises(AlignmentError):
        adamw_step(params, [torch.ones(2)], stale)


def test_step_decay():

    assert step_decay(0, 1e-3, hold=15, every=5) == 1e-3
    assert step_decay(14, 1e-3, hold=15, every=5) == 1e-3
    assert step_decay(15, 1e-3, hold=15, every=5) == pytest.approx(0.9e-3)
    assert step_decay(19, 1e-3, hold=15, every=5) == pytest.approx(0.9e-3)
    assert step_decay(20, 1e-3, hold=15, every=5) == pytest.approx(0.81e-3)

    with pytest.raises(PreconditionError):
        step_decay(3, 1e-3, hold=1, every=0)


def test_square_gradient():

    x = torch.tensor(3.0, requires_grad=True)
    (grad,) = torch.autograd.grad(x**2, [x])

    assert grad.item() == 6.0


def test_layer_shape_errors():

    with pytest.raises(ShapeError):
        conv2d(torch.zeros(2, 3, 8), torch.zeros(4, 3, 3, 3))

    with pytest.raises(ShapeError):
        conv2d(torch.zeros(2, 2, 8, 8), torch.zeros(4, 3, 3, 3))

    with pytest.raises(ShapeError):
        linear(torch.zeros(2, 5), torch.zeros(3, 4))

    with pytest.raises(ShapeError):
        mse_loss(torch.zeros(2), torch.zeros(3))


def test_max_pool_takes_block_maxima():

    x = torch.arange(16, dtype=torch.float64).reshape(1, 1, 4, 4)
    pooled = max_pool2d(x, 2, 2)

    assert torch.equal(pooled, torch.tensor([[[[5.0, 7.0], [13.0, 15.0]]]], dtype=torch.float64))
    assert max_pool2d(x, 1, 1) is x

    # gradient reaches the block maxima only
    x.requires_grad_(True)
    (grad,) = torch.autograd.grad(max_pool2d(x, 2, 2).sum(), [x])
    assert grad.sum().item() == 4.0
    assert grad[0, 0, 1, 1].item() == grad[0, 0, 3, 3].item() == 1.0


def test_grad_check_max_pool():

    # distinct values keep the maxima away from ties
    x = torch.randperm(120).reshape(2, 3, 4, 5) / 10 - 6

    report = grad_check(lambda p: max_pool2d(p["x"], 2, 1).pow(2).sum(), {"x": x})
    assert report.passed


def test_batch_norm_running_momentum():

    x = torch.randn(4, 2, 3, 3) + 5.0
    running_mean, running_var = torch.zeros(2), torch.ones(2)

    y, mean, _ = batch_norm2d(x, torch.ones(2), torch.zeros(2), running_mean, running_var, training=True, momentum=0.01)

    assert torch.allclose(mean, 0.01 * x.mean(dim=(0, 2, 3)), atol=1e-6)
    assert torch.allclose(y.mean(dim=(0, 2, 3)), torch.zeros(2), atol=1e-5)
    assert torch.equal(running_mean, torch.zeros(2))

    # inference uses the stored statistics
    y_eval, mean_eval, _ = batch_norm2d(x, torch.ones(2), torch.zeros(2), running_mean, running_var, training=False)
    assert mean_eval is running_mean
    assert torch.allclose(y_eval, x / np.sqrt(1 + 1e-5))


def test_grad_check_identity():

    report = grad_check(lambda p: p["x"].sum(), {"x": torch.randn(5)})

    assert report.passed
    assert report.max_error < 1e-9


def test_grad_check_linear():

    x = torch.randn(4, 6, dtype=torch.float64)
    report = grad_check(
        lambda p: linear(x, p["weight"], p["bias"]).sum(),
        {"weight": torch.randn(3, 6), "bias": torch.randn(3)},
    )

    assert report.max_error < 1e-9


def test_grad_check_flags_wrong_gradient():

    class Wrong(torch.autograd.Function):

        @staticmethod
        def forward(ctx, x):
            return x**2

        @staticmethod
        def backward(ctx, grad):
            return grad

    report = grad_check(lambda p: Wrong.apply(p["x"]).sum(), {"x": torch.full((3,), 2.0)})
    assert report.failures == ["x"]


def test_grad_check_conv2d():

    x = torch.randn(2, 3, 8, 8, dtype=torch.float64)
    report = grad_check(
        lambda p: conv2d(p["x"], p["weight"]).pow(2).sum(),
        {"x": x, "weight": torch.randn(4, 3, 3, 3)},
    )

    assert report.passed, report.errors


def test_grad_check_batch_norm():

    x = torch.randn(3, 2, 4, 4, dtype=torch.float64)
    mean, var = torch.zeros(2, dtype=torch.float64), torch.ones(2, dtype=torch.float64)

    report = grad_check(
        lambda p: batch_norm2d(p["x"], p["weight"], p["bias"], mean, var, training=True)[0].pow(3).sum(),
        {"x": x, "weight": torch.rand(2) + 0.5, "bias": torch.randn(2)},
    )

    assert report.passed, report.errors


def test_grad_check_bigru():

    hidden, features = 8, 3
    names = {
        "gru.weight_ih_f": (3 * hidden, features), "gru.weight_hh_f": (3 * hidden, hidden),
        "gru.bias_ih_f": (3 * hidden,), "gru.bias_hh_f": (3 * hidden,),
        "gru.weight_ih_b": (3 * hidden, features), "gru.weight_hh_b": (3 * hidden, hidden),
        "gru.bias_ih_b": (3 * hidden,), "gru.bias_hh_b": (3 * hidden,),
    }
    params = {name: 0.3 * torch.randn(shape) for name, shape in names.items()}
    x = torch.randn(2, 5, features, dtype=torch.float64)

    report = grad_check(lambda p: bigru(x, p).pow(2).sum(), params, tol=1e-3)

    assert report.passed, report.errors
    assert bigru(x, {k: v.double() for k, v in params.items()}).shape == (2, 5, 2 * hidden)


def test_gru_matches_torch():

    hidden, features = 4, 3
    reference = torch.nn.GRU(features, hidden, batch_first=True, bidirectional=True).double()

    params = {
        "gru.weight_ih_f": reference.weight_ih_l0, "gru.weight_hh_f": reference.weight_hh_l0,
        "gru.bias_ih_f": reference.bias_ih_l0, "gru.bias_hh_f": reference.bias_hh_l0,
        "gru.weight_ih_b": reference.weight_ih_l0_reverse, "gru.weight_hh_b": reference.weight_hh_l0_reverse,
        "gru.bias_ih_b": reference.bias_ih_l0_reverse, "gru.bias_hh_b": reference.bias_hh_l0_reverse,
    }

    x = torch.randn(2, 6, features, dtype=torch.float64)
    expected, _ = reference(x)

    with torch.no_grad():
        assert torch.allclose(bigru(x, params), expected, atol=1e-12)


def test_checkpoint_round_trip(tmp_path):

    path = tmp_path.joinpath("model.ckpt")
    sections = {
        "backbone": {"w": torch.randn(3, 2), "b": torch.randn(3, dtype=torch.float64)},
        "counts": {"n": torch.arange(4, dtype=torch.int64)},
    }
    write_checkpoint(path, sections, {"method": "meta"})

    loaded, metadata = read_checkpoint(path)

    assert metadata == {"method": "meta"}
    assert list(loaded) == ["backbone", "counts"]
    assert list(loaded["backbone"]) == ["w", "b"]
    for section, tensors in sections.items():
        for name, tensor in tensors.items():
            assert torch.equal(loaded[section][name], tensor)


def test_checkpoint_errors(tmp_path):

    path = tmp_path.joinpath("model.ckpt")

    path.write_bytes(b"NOPE" + bytes(8))
    with pytest.raises(CheckpointFormatError):
        read_checkpoint(path)

    write_checkpoint(path, {"s": {"w": torch.randn(10)}})
    blob = path.read_bytes()

    path.write_bytes(blob[:-4])
    with pytest.raises(CheckpointFormatError):
        read_checkpoint(path)

    path.write_bytes(blob + b"\x00")
    with pytest.raises(CheckpointFormatError):
        read_checkpoint(path)

    with pytest.raises(CheckpointFormatError):
        write_checkpoint(path, {"s": {"w": torch.zeros(2, dtype=torch.complex64)}})
