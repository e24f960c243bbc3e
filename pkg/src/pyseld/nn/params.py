"""layer-indexed parameter sets"""
from __future__ import annotations

from typing import Callable, Iterator, Mapping, Sequence

import torch

from pyseld.exceptions import AlignmentError, DataError


class ParamSet(Mapping[str, torch.Tensor]):
    """Ordered, layer-indexed mapping of parameter tensors.

    Every parameter belongs to exactly one layer l in [1, p]. Updates
    return new sets, the tensors of a set are never modified in place
    by this package."""

    def __init__(self, tensors: Mapping[str, torch.Tensor], layer_index: Mapping[str, int]):

        if set(tensors) != set(layer_index):
            raise DataError("every parameter needs exactly one layer index")

        self._tensors = dict(tensors)
        self._layer_index = {name: int(layer_index[name]) for name in self._tensors}

        layers = set(self._layer_index.values())
        if layers and layers != set(range(1, max(layers) + 1)):
            raise DataError(f"layer indices must cover 1..p without gaps, got {sorted(layers)}")

    def __getitem__(self, name: str) -> torch.Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def __repr__(self) -> str:
        return f"ParamSet(p={self.p}, params={len(self)}, numel={self.numel()})"

    @property
    def layer_index(self) -> dict[str, int]:
        """layer of every parameter"""
        return dict(self._layer_index)

    @property
    def p(self) -> int:
        """number of layers"""
        return max(self._layer_index.values(), default=0)

    def numel(self) -> int:
        """total number of values"""
        return sum(tensor.numel() for tensor in self._tensors.values())

    def layer(self, idx: int) -> list[str]:
        """names of the parameters in layer idx"""
        return [name for name, layer in self._layer_index.items() if layer == idx]

    def map(self, func: Callable[[torch.Tensor], torch.Tensor]) -> ParamSet:
        """apply func to every tensor"""
        return ParamSet({name: func(tensor) for name, tensor in self._tensors.items()}, self._layer_index)

    def with_tensors(self, tensors: Sequence[torch.Tensor] | Mapping[str, torch.Tensor]) -> ParamSet:
        """same names and layers with other tensors"""

        if isinstance(tensors, Mapping):
            tensors = [tensors[name] for name in self._tensors]

        tensors = list(tensors)
        if len(tensors) != len(self._tensors):
            raise AlignmentError(f"expected {len(self._tensors)} tensors, got {len(tensors)}")

        for (name, old), new in zip(self._tensors.items(), tensors):
            if old.shape != new.shape:
                raise AlignmentError(f"'{name}' has shape {tuple(old.shape)}, got {tuple(new.shape)}")

        return ParamSet(dict(zip(self._tensors, tensors)), self._layer_index)

    def detach(self) -> ParamSet:
        """tensors detached from any graph"""
        return self.map(torch.Tensor.detach)

    def clone(self) -> ParamSet:
        """deep copy of the values"""
        return self.map(lambda tensor: tensor.detach().clone())

    def leaves(self) -> ParamSet:
        """fresh leaf copies that record gradients"""
        return self.map(lambda tensor: tensor.detach().clone().requires_grad_(True))

    def to(self, dtype: torch.dtype) -> ParamSet:
        """cast every tensor"""
        return self.map(lambda tensor: tensor.to(dtype))

    def scale(self, lambdas: torch.Tensor) -> ParamSet:
        """layer-wise product, parameters of layer l times lambdas[l - 1]"""

        if lambdas.shape != (self.p,):
            raise AlignmentError(f"expected {self.p} layer coefficients, got shape {tuple(lambdas.shape)}")

        return ParamSet(
            {name: lambdas[self._layer_index[name] - 1] * tensor for name, tensor in self._tensors.items()},
            self._layer_index,
        )

    def equal(self, other: ParamSet) -> bool:
        """bitwise equality of names, layers and values"""

        if list(self) != list(other) or self._layer_index != other.layer_index:
            return False

        return all(torch.equal(self[name], other[name]) for name in self)


def check_aligned(params: ParamSet, grads: Mapping[str, torch.Tensor] | Sequence[torch.Tensor]) -> list[torch.Tensor]:
    """gradients ordered as params, validated by name and shape"""

    if isinstance(grads, Mapping):
        if set(grads) != set(params):
            raise AlignmentError(f"gradient names differ from parameters: {sorted(set(grads) ^ set(params))}")
        grads = [grads[name] for name in params]

    grads = list(grads)
    if len(grads) != len(params):
        raise AlignmentError(f"expected {len(params)} gradients, got {len(grads)}")

    for name, grad in zip(params, grads):
        if grad.shape != params[name].shape:
            raise AlignmentError(f"gradient of '{name}' has shape {tuple(grad.shape)}, expected {tuple(params[name].shape)}")

    return grads
