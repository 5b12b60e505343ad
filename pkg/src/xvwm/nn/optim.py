"""AdamW with decoupled weight decay and bias-corrected moments."""

from __future__ import annotations

import numpy as np

from ..errors import UsageError
from .tensor import Tensor


class AdamW:
    def __init__(self, params: dict[str, Tensor], lr: float = 1e-4,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.01):
        self.params = dict(params)
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self, lr: float | None = None) -> None:
        """One update; params with no gradient this step are still decayed
        toward zero only when they have a gradient (skip means untouched)."""
        lr = self.lr if lr is None else lr
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for k, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            if g.shape != p.data.shape:
                raise UsageError(f"{k}: grad shape {g.shape} vs param {p.data.shape}")
            m = self.m[k]
            v = self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            update = (m / c1) / (np.sqrt(v / c2) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.data
            p.data -= lr * update

    # -- checkpoint support -------------------------------------------------
    def state_arrays(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for k in self.params:
            out[f"m.{k}"] = self.m[k]
            out[f"v.{k}"] = self.v[k]
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray], t: int) -> None:
        for k in self.params:
            mk, vk = f"m.{k}", f"v.{k}"
            if mk not in arrays or vk not in arrays:
                raise UsageError(f"optimizer state missing moments for {k}")
            if arrays[mk].shape != self.m[k].shape:
                raise UsageError(f"{k}: moment shape {arrays[mk].shape} vs "
                                 f"param {self.m[k].shape}")
            self.m[k] = arrays[mk].astype(self.m[k].dtype).copy()
            self.v[k] = arrays[vk].astype(self.v[k].dtype).copy()
        self.t = int(t)
