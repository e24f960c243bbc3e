"""layer-wise attenuation of the initial backbone parameters"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import torch

from pyseld.exceptions import AttenuationModeError, ConfigError
from pyseld.nn import ParamSet, linear, relu
from pyseld.types import AttenuationInput

SUMMARY_STATS = 3


@dataclass(frozen=True)
class AttenuationConfig:
    """Attenuation network settings"""

    hidden: int = 1024
    bias_init: float = 3.0

    def __post_init__(self):

        if self.hidden < 1:
            raise ConfigError(f"attenuation hidden size must be positive, got {self.hidden}")


def input_dim(mode: AttenuationInput, p: int, representation_dim: int) -> int:
    """size of the attenuation network input"""

    if mode == "representations":
        return representation_dim

    if mode == "gradients":
        return SUMMARY_STATS * p

    return 0


def init_attenuation(
    mode: AttenuationInput,
    p: int,
    config: AttenuationConfig,
    in_dim: int = 0,
    seed: int = 0,
    dtype: torch.dtype = torch.float32,
) -> ParamSet:
    """Two-layer network with sigmoid output, or free logits for mode none.

    The output bias starts at bias_init so λ begins near one."""

    if mode not in ("none", "gradients", "representations"):
        raise AttenuationModeError(f"Unsupported attenuation input: '{mode}'")

    if mode == "none":
        return ParamSet({"logits": torch.full((p,), config.bias_init, dtype=dtype)}, {"logits": 1})

    if in_dim < 1:
        raise AttenuationModeError(f"attenuation input '{mode}' needs a positive input size")

    generator = torch.Generator().manual_seed(seed)

    def uniform(shape, fan_in: int) -> torch.Tensor:
        bound = 1 / np.sqrt(fan_in)
        return (torch.rand(shape, generator=generator, dtype=dtype) * 2 - 1) * bound

    tensors = {
        "fc1.weight": uniform((config.hidden, in_dim), in_dim),
        "fc1.bias": uniform((config.hidden,), in_dim),
        "fc2.weight": uniform((p, config.hidden), config.hidden),
        "fc2.bias": torch.full((p,), config.bias_init, dtype=dtype),
    }

    return ParamSet(tensors, {"fc1.weight": 1, "fc1.bias": 1, "fc2.weight": 2, "fc2.bias": 2})


def gradient_summary(grads: Mapping[str, torch.Tensor], layer_index: Mapping[str, int], p: int) -> torch.Tensor:
    """Per-layer mean |g|, RMS g and max |g|, layer-major, shape (3p,)"""

    stats = []
    for layer in range(1, p + 1):

        names = [name for name, idx in layer_index.items() if idx == layer]
        if not names:
            raise AttenuationModeError(f"layer {layer} has no gradients to summarize")

        flat = torch.cat([grads[name].detach().reshape(-1) for name in names])
        stats.extend([flat.abs().mean(), flat.pow(2).mean().sqrt(), flat.abs().max()])

    return torch.stack(stats)


def attenuation_coefficients(
    phi: ParamSet,
    mode: AttenuationInput,
    input_vec: torch.Tensor | None = None,
) -> torch.Tensor:
    """λ in (0, 1) per backbone layer"""

    if mode == "none":
        if "logits" not in phi:
            raise AttenuationModeError("attenuation parameters lack free logits for mode 'none'")
        return torch.sigmoid(phi["logits"])

    if "fc1.weight" not in phi:
        raise AttenuationModeError(f"attenuation parameters lack a network for mode '{mode}'")

    if input_vec is None or input_vec.dim() != 1 or input_vec.shape[0] != phi["fc1.weight"].shape[1]:
        shape = None if input_vec is None else tuple(input_vec.shape)
        raise AttenuationModeError(f"mode '{mode}' expects an input of size {phi['fc1.weight'].shape[1]}, got {shape}")

    hidden = relu(linear(input_vec, phi["fc1.weight"], phi["fc1.bias"]))
    return torch.sigmoid(linear(hidden, phi["fc2.weight"], phi["fc2.bias"]))


def attenuate(
    phi: ParamSet | None,
    input_vec: torch.Tensor | None,
    theta: ParamSet,
    mode: AttenuationInput = "representations",
    bypass: bool = False,
) -> tuple[torch.Tensor, ParamSet]:
    """Scale every backbone layer by its attenuation coefficient.

    Parameters
    ----------
    phi : ParamSet
        Attenuation parameters, unused with bypass.
    input_vec : Tensor
        Representation or gradient summary, None for mode none.
    theta : ParamSet
        Backbone parameters.
    mode : {'none', 'gradients', 'representations'}
        Input of the attenuation network.
    bypass : bool, default False
        Force λ = 1 and return theta itself.

    Return
    ------
    lambdas, params : Tensor, ParamSet
        Coefficients of shape (p,) and λ ⊙ θ."""

    if bypass:
        return torch.ones(theta.p, dtype=next(iter(theta.values())).dtype), theta

    if phi is None:
        raise AttenuationModeError("attenuation parameters are required without bypass")

    lambdas = attenuation_coefficients(phi, mode, input_vec)
    if lambdas.shape != (theta.p,):
        raise AttenuationModeError(f"attenuation yields {lambdas.shape[0]} coefficients for {theta.p} layers")

    return lambdas, theta.scale(lambdas)
