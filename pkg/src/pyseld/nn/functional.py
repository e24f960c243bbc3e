"""functional layers over explicit parameter tensors"""
from __future__ import annotations

import torch
import torch.nn.functional as F

from pyseld.exceptions import ShapeError


def _expect_rank(x: torch.Tensor, rank: int, op: str) -> None:
    if x.dim() != rank:
        raise ShapeError(f"{op} expects a rank-{rank} input, got shape {tuple(x.shape)}")


def conv2d(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor | None = None) -> torch.Tensor:
    """same-padded 2D convolution of (B, C, T, F) maps"""

    _expect_rank(x, 4, "conv2d")
    if x.shape[1] != weight.shape[1]:
        raise ShapeError(f"conv2d input has {x.shape[1]} channels, weight expects {weight.shape[1]}")

    return F.conv2d(x, weight, bias, padding=weight.shape[-1] // 2)


def batch_norm2d(
    x: torch.Tensor,
    weight: torch.Tensor,
    bias: torch.Tensor,
    running_mean: torch.Tensor,
    running_var: torch.Tensor,
    training: bool,
    momentum: float = 0.01,
    eps: float = 1e-5,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Batch normalization of (B, C, T, F) maps.

    In training mode the batch statistics normalize and the returned
    running statistics move by momentum toward them, otherwise the
    running statistics normalize and are returned unchanged.

    Return
    ------
    y, running_mean, running_var : Tensor
        Output and the new running statistics."""

    _expect_rank(x, 4, "batch_norm2d")
    if x.shape[1] != weight.shape[0]:
        raise ShapeError(f"batch_norm2d input has {x.shape[1]} channels, weight expects {weight.shape[0]}")

    if training:

        mean = x.mean(dim=(0, 2, 3))
        var = x.var(dim=(0, 2, 3), unbiased=False)

        # unbiased variance enters the running estimate
        count = x.numel() // x.shape[1]
        unbiased = var.detach() * count / max(count - 1, 1)

        running_mean = (1 - momentum) * running_mean + momentum * mean.detach()
        running_var = (1 - momentum) * running_var + momentum * unbiased

    else:
        mean, var = running_mean, running_var

    scale = weight / torch.sqrt(var + eps)
    y = (x - mean[None, :, None, None]) * scale[None, :, None, None] + bias[None, :, None, None]

    return y, running_mean, running_var


def relu(x: torch.Tensor) -> torch.Tensor:
    """rectified linear unit"""
    return torch.relu(x)


def max_pool2d(x: torch.Tensor, time: int, freq: int) -> torch.Tensor:
    """non-overlapping max pooling over time and frequency"""
    return F.max_pool2d(x, kernel_size=(time, freq)) if time * freq > 1 else x


def linear(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor | None = None) -> torch.Tensor:
    """affine map over the last axis"""

    if x.shape[-1] != weight.shape[-1]:
        raise ShapeError(f"linear input has {x.shape[-1]} features, weight expects {weight.shape[-1]}")

    return F.linear(x, weight, bias)


def gru(
    x: torch.Tensor,
    weight_ih: torch.Tensor,
    weight_hh: torch.Tensor,
    bias_ih: torch.Tensor,
    bias_hh: torch.Tensor,
    reverse: bool = False,
) -> torch.Tensor:
    """Single-direction GRU over (B, T, I) with zero initial state.

    Gates are stacked (reset, update, new) as rows of the weights:
    r = σ(W_ir x + b_ir + W_hr h + b_hr), z likewise,
    n = tanh(W_in x + b_in + r (W_hn h + b_hn)), h' = (1 - z) n + z h."""

    _expect_rank(x, 3, "gru")
    hidden = weight_hh.shape[-1]

    if weight_ih.shape != (3 * hidden, x.shape[-1]):
        raise ShapeError(f"gru input weight has shape {tuple(weight_ih.shape)}, expected {(3 * hidden, x.shape[-1])}")

    # input projections of all steps at once
    gates_x = F.linear(x, weight_ih, bias_ih)
    h = x.new_zeros(x.shape[0], hidden)

    steps = range(x.shape[1] - 1, -1, -1) if reverse else range(x.shape[1])
    outputs = [None] * x.shape[1]

    for t in steps:
        gx_r, gx_z, gx_n = gates_x[:, t].chunk(3, dim=-1)
        gh_r, gh_z, gh_n = F.linear(h, weight_hh, bias_hh).chunk(3, dim=-1)

        r = torch.sigmoid(gx_r + gh_r)
        z = torch.sigmoid(gx_z + gh_z)
        n = torch.tanh(gx_n + r * gh_n)

        h = (1 - z) * n + z * h
        outputs[t] = h

    return torch.stack(outputs, dim=1)


def bigru(x: torch.Tensor, params: dict[str, torch.Tensor], prefix: str = "gru") -> torch.Tensor:
    """bidirectional GRU, forward and backward states concatenated"""

    forward = gru(
        x, params[f"{prefix}.weight_ih_f"], params[f"{prefix}.weight_hh_f"],
        params[f"{prefix}.bias_ih_f"], params[f"{prefix}.bias_hh_f"],
    )
    backward = gru(
        x, params[f"{prefix}.weight_ih_b"], params[f"{prefix}.weight_hh_b"],
        params[f"{prefix}.bias_ih_b"], params[f"{prefix}.bias_hh_b"], reverse=True,
    )

    return torch.cat([forward, backward], dim=-1)


def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """mean squared error over all entries"""

    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss shapes differ: {tuple(pred.shape)} vs {tuple(target.shape)}")

    return F.mse_loss(pred, target, reduction="mean")
