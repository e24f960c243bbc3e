"""pure-functional optimizers and learning-rate schedule"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import torch

from pyseld.exceptions import AlignmentError, PreconditionError
from pyseld.types import OptimizerKind

from .params import ParamSet, check_aligned

Grads = Mapping[str, torch.Tensor] | Sequence[torch.Tensor]


@dataclass(frozen=True)
class OptimizerState:
    """Optimizer settings with AdamW moments per parameter"""

    kind: OptimizerKind = "adamw"
    lr: float = 1e-3
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    step: int = 0
    exp_avg: dict[str, torch.Tensor] = field(default_factory=dict)
    exp_avg_sq: dict[str, torch.Tensor] = field(default_factory=dict)

    def with_lr(self, lr: float) -> OptimizerState:
        """same moments at another learning rate"""
        return replace(self, lr=lr)

    def check(self, params: ParamSet) -> None:
        """moments must match parameters by name and shape"""

        for moments in (self.exp_avg, self.exp_avg_sq):
            if moments and set(moments) != set(params):
                raise AlignmentError("optimizer moments do not match the parameter names")

            for name, moment in moments.items():
                if moment.shape != params[name].shape:
                    raise AlignmentError(f"moment of '{name}' has shape {tuple(moment.shape)}")


def sgd_step(params: ParamSet, grads: Grads, lr: float) -> ParamSet:
    """θ ← θ - lr·g as a new set"""

    grads = check_aligned(params, grads)
    if lr == 0:
        return params.clone()

    with torch.no_grad():
        return params.with_tensors([
            tensor.detach() - lr * grad.detach() for tensor, grad in zip(params.values(), grads)
        ])


def adamw_step(params: ParamSet, grads: Grads, state: OptimizerState) -> tuple[ParamSet, OptimizerState]:
    """Bias-corrected Adam update with decoupled weight decay.

    Return
    ------
    params, state : ParamSet, OptimizerState
        New parameters and moments, inputs untouched."""

    if state.kind != "adamw":
        raise PreconditionError(f"adamw_step needs an adamw state, got '{state.kind}'")

    grads = check_aligned(params, grads)
    state.check(params)

    beta1, beta2 = state.betas
    step = state.step + 1

    new, exp_avg, exp_avg_sq = [], {}, {}
    with torch.no_grad():
        for (name, theta), grad in zip(params.items(), grads):

            grad = grad.detach()
            m = state.exp_avg.get(name, torch.zeros_like(theta))
            v = state.exp_avg_sq.get(name, torch.zeros_like(theta))

            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad * grad

            m_hat = m / (1 - beta1**step)
            v_hat = v / (1 - beta2**step)

            theta = theta.detach() * (1 - state.lr * state.weight_decay)
            new.append(theta - state.lr * m_hat / (torch.sqrt(v_hat) + state.eps))

            exp_avg[name], exp_avg_sq[name] = m, v

    return params.with_tensors(new), replace(state, step=step, exp_avg=exp_avg, exp_avg_sq=exp_avg_sq)


def step_decay(epoch: int, base_lr: float, hold: int, every: int, gamma: float = 0.9) -> float:
    """base_lr for the first hold epochs, then times gamma every few epochs"""

    if every < 1:
        raise PreconditionError(f"decay interval must be at least one epoch, got {every}")

    if epoch < hold:
        return base_lr

    return base_lr * gamma ** (1 + (epoch - hold) // every)
