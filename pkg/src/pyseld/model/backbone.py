"""CRNN backbone: four convolution blocks and a bidirectional GRU"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from pyseld.exceptions import ConfigError, ShapeError
from pyseld.nn import ParamSet, batch_norm2d, bigru, conv2d, linear, max_pool2d, relu

BnState = dict[str, torch.Tensor]


@dataclass(frozen=True)
class BackboneConfig:
    """Backbone architecture, desk scale by default"""

    channels: tuple[int, ...] = (16, 32, 64, 128)
    time_pools: tuple[int, ...] = (2, 2, 1, 1)
    freq_pools: tuple[int, ...] = (4, 4, 2, 2)
    gru_hidden: int = 64
    n_classes: int = 5
    in_channels: int = 7
    n_frames: int = 376
    n_mels: int = 64
    n_label_frames: int = 50
    bn_momentum: float = 0.01

    def __post_init__(self):

        if not len(self.channels) == len(self.time_pools) == len(self.freq_pools) == 4:
            raise ConfigError("backbone needs exactly 4 convolution blocks")

        if self.n_mels % int(np.prod(self.freq_pools)):
            raise ConfigError(f"{self.n_mels} mel bands are not divisible by the frequency pools {self.freq_pools}")

        if self.out_frames < 1:
            raise ConfigError(f"{self.n_frames} frames vanish under the time pools {self.time_pools}")

    @property
    def out_frames(self) -> int:
        """output frames T'"""
        return self.n_frames // int(np.prod(self.time_pools))

    @property
    def out_bands(self) -> int:
        """mel bands left after pooling"""
        return self.n_mels // int(np.prod(self.freq_pools))


@dataclass(frozen=True, eq=False)
class BackboneOutput:
    """ACCDOA output and per-layer maps reduced to (B, T, C)"""

    accdoa: torch.Tensor
    layer_maps: list[torch.Tensor] = field(default_factory=list)
    bn_state: BnState = field(default_factory=dict)


def layer_names(config: BackboneConfig | None = None) -> list[str]:
    """modules in layer order, one index each"""

    blocks = range(1, len((config or BackboneConfig()).channels) + 1)
    return [name for idx in blocks for name in (f"conv{idx}", f"bn{idx}")] + ["gru", "fc"]


def layer_channels(config: BackboneConfig) -> list[int]:
    """channel width of every layer map"""
    return [c for c in config.channels for _ in range(2)] + [2 * config.gru_hidden, 3 * config.n_classes]


def init_backbone(config: BackboneConfig, seed: int = 0, dtype: torch.dtype = torch.float32) -> tuple[ParamSet, BnState]:
    """Randomly initialized parameters and fresh batchnorm statistics.

    Return
    ------
    params, bn_state : ParamSet, dict
        Parameters with p = 10 layers and running statistics."""

    generator = torch.Generator().manual_seed(seed)

    def uniform(shape, fan_in: int) -> torch.Tensor:
        bound = 1 / np.sqrt(fan_in)
        return (torch.rand(shape, generator=generator, dtype=dtype) * 2 - 1) * bound

    tensors, layers, bn_state = {}, {}, {}
    in_channels, layer = config.in_channels, 1

    for idx, out_channels in enumerate(config.channels, start=1):

        # kaiming uniform for relu
        tensors[f"conv{idx}.weight"] = uniform((out_channels, in_channels, 3, 3), in_channels * 9) * np.sqrt(6)
        layers[f"conv{idx}.weight"] = layer

        tensors[f"bn{idx}.weight"] = torch.ones(out_channels, dtype=dtype)
        tensors[f"bn{idx}.bias"] = torch.zeros(out_channels, dtype=dtype)
        layers[f"bn{idx}.weight"] = layers[f"bn{idx}.bias"] = layer + 1

        bn_state[f"bn{idx}.running_mean"] = torch.zeros(out_channels, dtype=dtype)
        bn_state[f"bn{idx}.running_var"] = torch.ones(out_channels, dtype=dtype)

        in_channels, layer = out_channels, layer + 2

    gru_in, hidden = config.channels[-1] * config.out_bands, config.gru_hidden
    for direction in ("f", "b"):
        tensors[f"gru.weight_ih_{direction}"] = uniform((3 * hidden, gru_in), hidden)
        tensors[f"gru.weight_hh_{direction}"] = uniform((3 * hidden, hidden), hidden)
        tensors[f"gru.bias_ih_{direction}"] = uniform((3 * hidden,), hidden)
        tensors[f"gru.bias_hh_{direction}"] = uniform((3 * hidden,), hidden)

    layers.update({name: layer for name in tensors if name.startswith("gru.")})

    tensors["fc.weight"] = uniform((3 * config.n_classes, 2 * hidden), 2 * hidden)
    tensors["fc.bias"] = torch.zeros(3 * config.n_classes, dtype=dtype)
    layers["fc.weight"] = layers["fc.bias"] = layer + 1

    return ParamSet(tensors, layers), bn_state


def backbone_forward(
    params: ParamSet,
    x: torch.Tensor,
    bn_state: BnState,
    config: BackboneConfig,
    training: bool = False,
) -> BackboneOutput:
    """Forward pass of (B, C, T, F) features.

    Parameters
    ----------
    params : ParamSet
        Backbone parameters.
    x : Tensor
        Input features, shape (B, C, T, F).
    bn_state : dict
        Batchnorm running statistics.
    config : BackboneConfig
        Architecture.
    training : bool, default False
        Normalize with batch statistics and update running statistics.

    Return
    ------
    output : BackboneOutput
        ACCDOA of shape (B, T', M, 3), layer maps and running statistics."""

    expected = (config.in_channels, config.n_frames, config.n_mels)
    if x.dim() != 4 or tuple(x.shape[1:]) != expected:
        raise ShapeError(f"backbone expects input (B, {', '.join(map(str, expected))}), got {tuple(x.shape)}")

    maps, new_state = [], {}
    for idx, (tpool, fpool) in enumerate(zip(config.time_pools, config.freq_pools), start=1):

        x = conv2d(x, params[f"conv{idx}.weight"])
        maps.append(x.mean(dim=-1).transpose(1, 2))

        x, mean, var = batch_norm2d(
            x, params[f"bn{idx}.weight"], params[f"bn{idx}.bias"],
            bn_state[f"bn{idx}.running_mean"], bn_state[f"bn{idx}.running_var"],
            training=training, momentum=config.bn_momentum,
        )
        maps.append(x.mean(dim=-1).transpose(1, 2))

        new_state[f"bn{idx}.running_mean"], new_state[f"bn{idx}.running_var"] = mean, var
        x = max_pool2d(relu(x), tpool, fpool)

    # (B, C, T', F') -> (B, T', C·F')
    x = x.permute(0, 2, 1, 3).flatten(start_dim=2)

    x = bigru(x, params)
    maps.append(x)

    x = linear(x, params["fc.weight"], params["fc.bias"])
    maps.append(x)

    accdoa = torch.tanh(x).reshape(x.shape[0], x.shape[1], config.n_classes, 3)
    return BackboneOutput(accdoa=accdoa, layer_maps=maps, bn_state=new_state)
