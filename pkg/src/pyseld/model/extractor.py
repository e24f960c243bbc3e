"""environment representation extractor"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from pyseld.exceptions import ConfigError, EmptyBatchError, ShapeError
from pyseld.nn import ParamSet, linear
from pyseld.types import ExtractorVariant

ENERGY_FLOOR = 1e-12


@dataclass(frozen=True)
class ExtractorConfig:
    """Extractor variant and embedding size"""

    variant: ExtractorVariant = "all_layers"
    dim: int = 2048

    def __post_init__(self):

        if self.variant not in ("all_layers", "last_mean", "last_encode"):
            raise ConfigError(f"Unsupported extractor variant: '{self.variant}'")

        if self.dim < 1:
            raise ConfigError(f"embedding dim must be positive, got {self.dim}")


@dataclass(frozen=True, eq=False)
class EnvRepresentation:
    """Embedding of one support batch"""

    vector: torch.Tensor
    env_id: str = ""
    offsets: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        """embedding size D"""
        return self.vector.shape[-1]


def slice_sizes(dim: int, n_layers: int) -> list[int]:
    """near-equal split of dim over the layers"""
    return [len(part) for part in np.array_split(np.arange(dim), n_layers)]


def output_dim(config: ExtractorConfig, channels: Sequence[int]) -> int:
    """representation size for the variant"""
    return channels[-1] if config.variant == "last_mean" else config.dim


def init_extractor(
    channels: Sequence[int],
    config: ExtractorConfig,
    seed: int = 0,
    dtype: torch.dtype = torch.float32,
) -> ParamSet:
    """Projection parameters per encoded layer.

    Parameters
    ----------
    channels : sequence of int
        Channel width of every backbone layer map.
    config : ExtractorConfig
        Variant and embedding size.
    seed : int, default 0
        Initialization seed.

    Return
    ------
    params : ParamSet
        One layer index per projection, empty for last_mean."""

    if config.variant == "last_mean":
        return ParamSet({}, {})

    widths = list(channels) if config.variant == "all_layers" else [channels[-1]]
    if config.dim < len(widths):
        raise ConfigError(f"embedding dim {config.dim} is smaller than the {len(widths)} encoded layers")

    generator = torch.Generator().manual_seed(seed)

    tensors, layers = {}, {}
    for idx, (width, size) in enumerate(zip(widths, slice_sizes(config.dim, len(widths))), start=1):

        bound = 1 / np.sqrt(2 * width)
        tensors[f"enc{idx}.weight"] = (torch.rand((size, 2 * width), generator=generator, dtype=dtype) * 2 - 1) * bound
        tensors[f"enc{idx}.bias"] = torch.zeros(size, dtype=dtype)
        layers[f"enc{idx}.weight"] = layers[f"enc{idx}.bias"] = idx

    return ParamSet(tensors, layers)


def pool_layer_map(layer_map: torch.Tensor) -> torch.Tensor:
    """Plain mean and energy-weighted mean over batch and time.

    Weights are the softmax of the per-position log-energy.

    Return
    ------
    pooled : Tensor
        Concatenated means, shape (2C,)."""

    if layer_map.dim() != 3:
        raise ShapeError(f"layer map must be (B, T, C), got shape {tuple(layer_map.shape)}")

    if layer_map.shape[0] == 0 or layer_map.shape[1] == 0:
        raise EmptyBatchError("cannot pool an empty support batch")

    positions = layer_map.reshape(-1, layer_map.shape[-1])
    plain = positions.mean(dim=0)

    log_energy = torch.log(positions.pow(2).sum(dim=-1) + ENERGY_FLOOR)
    weights = torch.softmax(log_energy, dim=0)

    return torch.cat([plain, weights @ positions])


def extract_env_representation(
    omega: ParamSet,
    layer_maps: Sequence[torch.Tensor],
    config: ExtractorConfig,
    env_id: str = "",
) -> EnvRepresentation:
    """Embed the layer maps of one support batch.

    Parameters
    ----------
    omega : ParamSet
        Extractor parameters.
    layer_maps : sequence of Tensor
        Backbone maps, each (B, T, C).
    config : ExtractorConfig
        Variant and embedding size.
    env_id : str, default ''
        Environment of the batch.

    Return
    ------
    representation : EnvRepresentation
        Concatenated per-layer embeddings."""

    if not layer_maps:
        raise EmptyBatchError("no layer maps to encode")

    if config.variant == "last_mean":
        last = layer_maps[-1]
        if last.shape[0] == 0 or last.shape[1] == 0:
            raise EmptyBatchError("cannot pool an empty support batch")

        return EnvRepresentation(last.reshape(-1, last.shape[-1]).mean(dim=0), env_id, (0,))

    maps = layer_maps if config.variant == "all_layers" else layer_maps[-1:]
    if len(maps) != omega.p:
        raise ShapeError(f"extractor encodes {omega.p} layers, got {len(maps)} maps")

    slices, offsets, offset = [], [], 0
    for idx, layer_map in enumerate(maps, start=1):

        pooled = pool_layer_map(layer_map)
        embedding = linear(pooled, omega[f"enc{idx}.weight"], omega[f"enc{idx}.bias"])

        slices.append(embedding)
        offsets.append(offset)
        offset += embedding.shape[-1]

    return EnvRepresentation(torch.cat(slices), env_id, tuple(offsets))
