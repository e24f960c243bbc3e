"""central finite-difference gradient checks"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import torch


@dataclass(frozen=True)
class GradCheckReport:
    """Relative error per parameter"""

    errors: dict[str, float] = field(default_factory=dict)
    tol: float = 1e-4

    @property
    def max_error(self) -> float:
        """largest relative error"""
        return max(self.errors.values(), default=0.0)

    @property
    def failures(self) -> list[str]:
        """parameters above tolerance"""
        return [name for name, error in self.errors.items() if error > self.tol]

    @property
    def passed(self) -> bool:
        """all parameters within tolerance"""
        return not self.failures


def _relative_error(analytic: torch.Tensor, numeric: torch.Tensor) -> float:

    scale = max(analytic.abs().max().item(), numeric.abs().max().item())
    if scale == 0:
        return 0.0

    return (analytic - numeric).abs().max().item() / scale


def grad_check(
    func: Callable[[Mapping[str, torch.Tensor]], torch.Tensor],
    params: Mapping[str, torch.Tensor],
    eps: float = 1e-4,
    tol: float = 1e-4,
) -> GradCheckReport:
    """Compare autograd against central differences in 64-bit.

    Parameters
    ----------
    func : Callable
        Scalar-valued function of the named tensors.
    params : Mapping
        Named tensors at which gradients are checked.
    eps : float, default 1e-4
        Finite-difference step.
    tol : float, default 1e-4
        Relative error tolerance per tensor.

    Return
    ------
    report : GradCheckReport
        Max-norm relative error per tensor."""

    point = {name: tensor.detach().to(torch.float64).clone().requires_grad_(True) for name, tensor in params.items()}

    value = func(point)
    analytic = dict(zip(point, torch.autograd.grad(value, list(point.values()), allow_unused=True)))

    errors = {}
    with torch.no_grad():
        for name, tensor in point.items():

            numeric = torch.zeros_like(tensor)
            flat, grad = tensor.view(-1), numeric.view(-1)

            for idx in range(flat.numel()):
                orig = flat[idx].item()

                flat[idx] = orig + eps
                upper = func(point).item()
                flat[idx] = orig - eps
                lower = func(point).item()
                flat[idx] = orig

                grad[idx] = (upper - lower) / (2 * eps)

            exact = analytic[name] if analytic[name] is not None else torch.zeros_like(tensor)
            errors[name] = _relative_error(exact, numeric)

    return GradCheckReport(errors=errors, tol=tol)
