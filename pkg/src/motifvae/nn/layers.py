"""Parameterized building blocks: linear maps, MLPs, layer norm, embeddings."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Tensor


class Module:
    """Tiny parameter-registry base; submodules and Tensors are discovered
    by attribute walk."""

    def named_parameters(self, prefix: str = ""):
        for name, value in vars(self).items():
            key = f"{prefix}{name}" if not prefix else f"{prefix}.{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield key, value
            elif isinstance(value, Module):
                yield from value.named_parameters(key)
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{key}.{i}")
                    elif isinstance(item, Tensor) and item.requires_grad:
                        yield f"{key}.{i}", item

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]


def _kaiming(rng: np.random.Generator, fan_in: int, fan_out: int, dtype) -> np.ndarray:
    scale = np.sqrt(2.0 / max(fan_in, 1))
    return (rng.standard_normal((fan_in, fan_out)) * scale).astype(dtype)


class Linear(Module):
    def __init__(self, rng: np.random.Generator, in_dim: int, out_dim: int, dtype):
        self.weight = T.parameter(_kaiming(rng, in_dim, out_dim, dtype))
        self.bias = T.parameter(np.zeros(out_dim, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias


class MLP(Module):
    """Linear stack with LeakyReLU between layers (none after the last)."""

    def __init__(
        self,
        rng: np.random.Generator,
        dims: list[int],
        dtype,
        slope: float = 0.01,
    ):
        if len(dims) < 2:
            raise ValueError("MLP needs at least input and output dims")
        self.layers = [
            Linear(rng, dims[i], dims[i + 1], dtype) for i in range(len(dims) - 1)
        ]
        self.slope = slope

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = T.leaky_relu(x, self.slope)
        return x


class LayerNorm(Module):
    def __init__(self, dim: int, dtype):
        self.gain = T.parameter(np.ones(dim, dtype=dtype))
        self.bias = T.parameter(np.zeros(dim, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gain, self.bias)


class Embedding(Module):
    def __init__(self, rng: np.random.Generator, count: int, dim: int, dtype):
        self.table = T.parameter(
            (rng.standard_normal((count, dim)) * 0.1).astype(dtype)
        )

    def __call__(self, idx: np.ndarray) -> Tensor:
        return T.gather_rows(self.table, idx)
