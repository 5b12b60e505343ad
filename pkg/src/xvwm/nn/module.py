"""Parameter containers: a tiny module system over the tensor type.

Modules exist to give every parameter a stable dotted name for the
optimizer and the checkpoint format; forward logic stays in plain
functions and methods.
"""

from __future__ import annotations

import numpy as np

from ..errors import UsageError
from .tensor import Tensor


class Module:
    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for key, val in vars(self).items():
            name = f"{prefix}{key}" if not prefix else f"{prefix}.{key}"
            if isinstance(val, Tensor) and val.requires_grad:
                out[name] = val
            elif isinstance(val, Module):
                out.update(val.named_parameters(name))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(f"{name}.{i}"))
                    elif isinstance(item, Tensor) and item.requires_grad:
                        out[f"{name}.{i}"] = item
        return out

    def zero_grad(self) -> None:
        for p in self.named_parameters().values():
            p.grad = None

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.named_parameters().values())


def _rng_or_die(rng) -> np.random.Generator:
    if not isinstance(rng, np.random.Generator):
        raise UsageError("pass an explicit numpy Generator for seeded init")
    return rng


class Linear(Module):
    """y = x W + b. Init is N(0, std); std=0 gives the zero-init layers the
    conditioning path needs."""

    def __init__(self, d_in: int, d_out: int, rng, std: float = 0.02,
                 bias: bool = True, dtype=np.float32):
        rng = _rng_or_die(rng)
        if std == 0.0:
            w = np.zeros((d_in, d_out), dtype=dtype)
        else:
            w = rng.normal(0.0, std, size=(d_in, d_out)).astype(dtype)
        self.weight = Tensor(w, requires_grad=True)
        self.bias = Tensor(np.zeros(d_out, dtype=dtype), requires_grad=True) \
            if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = x.matmul(self.weight)
        if self.bias is not None:
            y = y + self.bias
        return y


class Embedding(Module):
    def __init__(self, rows: int, dim: int, rng, std: float = 0.02,
                 dtype=np.float32):
        rng = _rng_or_die(rng)
        self.weight = Tensor(rng.normal(0.0, std, size=(rows, dim)).astype(dtype),
                             requires_grad=True)

    def __call__(self, ids) -> Tensor:
        from .tensor import embedding_lookup
        return embedding_lookup(self.weight, ids)
