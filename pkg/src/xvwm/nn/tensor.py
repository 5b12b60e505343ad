"""Dense tensors with reverse-mode differentiation on a closure tape.

Every op builds a child tensor holding a closure that routes the child's
gradient to its parents; backward() walks the graph once in reverse
topological order. A graph supports a single backward pass: the training
loop rebuilds graphs every step, so retaining them buys nothing and hides
bugs. Compute dtype follows the inputs (f32 in training, f64 when checking
gradients), and shapes must match exactly apart from trailing-shape
expansion over leading batch axes.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np

from ..errors import UsageError

_grad_enabled = True


@contextmanager
def no_grad():
    """Build no graph inside the block; inference and sampling run here."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents",
                 "_spent", "name")

    def __init__(self, data, requires_grad: bool = False, _parents=(), name=None):
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad) and _grad_enabled
        self._backward = None
        self._parents = _parents if self.requires_grad else ()
        self._spent = False
        self.name = name

    # -- basics -----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        tag = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{tag})"

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def _accum(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    # -- graph ------------------------------------------------------------
    def backward(self) -> None:
        """Populate .grad on every requires_grad ancestor; one shot per graph."""
        if self.data.size != 1:
            raise UsageError(f"backward needs a scalar loss, got shape {self.shape}")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        for node in topo:
            if node._spent:
                raise UsageError("graph already backpropagated; rebuild it "
                                 "instead of reusing tensors across steps")
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()
            node._spent = node._parents != ()
            # drop the closure and parent links: the closure captures this
            # node (a reference cycle), and without the links the whole
            # graph frees by refcount as soon as the caller lets go of the
            # loss, instead of lingering until a gc cycle pass
            node._backward = None
            node._parents = ()
        for node in topo:
            if not node.requires_grad or node._spent:
                node.grad = None

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "Tensor") -> "Tensor":
        other = _as_tensor(other, self.dtype)
        a, b = self, other
        _check_expandable(a.shape, b.shape, "add")
        req = a.requires_grad or b.requires_grad
        out = Tensor(a.data + b.data, req, _parents=_parents(a, b))
        if out.requires_grad:
            def back():
                if a.requires_grad:
                    a._accum(_unexpand(out.grad, a.shape))
                if b.requires_grad:
                    b._accum(_unexpand(out.grad, b.shape))
            out._backward = back
        return out

    def __mul__(self, other) -> "Tensor":
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        other = _as_tensor(other, self.dtype)
        a, b = self, other
        _check_expandable(a.shape, b.shape, "mul")
        req = a.requires_grad or b.requires_grad
        out = Tensor(a.data * b.data, req, _parents=_parents(a, b))
        if out.requires_grad:
            def back():
                if a.requires_grad:
                    a._accum(_unexpand(out.grad * b.data, a.shape))
                if b.requires_grad:
                    b._accum(_unexpand(out.grad * a.data, b.shape))
            out._backward = back
        return out

    __rmul__ = __mul__

    def __sub__(self, other: "Tensor") -> "Tensor":
        other = _as_tensor(other, self.dtype)
        return self + other.scale(-1.0)

    def __neg__(self) -> "Tensor":
        return self.scale(-1.0)

    def scale(self, s: float) -> "Tensor":
        out = Tensor(self.data * s, self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                self._accum(out.grad * s)
            out._backward = back
        return out

    def matmul(self, other: "Tensor") -> "Tensor":
        """Last-two-axes product. Either both operands share their leading
        axes, or the right one is a plain 2-D matrix applied across them."""
        a, b = self, _as_tensor(other, self.dtype)
        if a.data.ndim < 2 or b.data.ndim < 2:
            raise UsageError(f"matmul needs >=2-D operands, got {a.shape} @ {b.shape}")
        plain_rhs = b.data.ndim == 2 and a.data.ndim >= 2
        if a.shape[-1] != b.shape[-2] or (not plain_rhs and a.shape[:-2] != b.shape[:-2]):
            raise UsageError(f"matmul shape mismatch {a.shape} @ {b.shape}")
        req = a.requires_grad or b.requires_grad
        out = Tensor(a.data @ b.data, req, _parents=_parents(a, b))
        if out.requires_grad:
            def back():
                if a.requires_grad:
                    a._accum(out.grad @ b.data.swapaxes(-1, -2))
                if b.requires_grad:
                    if plain_rhs and a.data.ndim > 2:
                        flat_a = a.data.reshape(-1, a.shape[-1])
                        flat_g = out.grad.reshape(-1, out.grad.shape[-1])
                        b._accum(flat_a.T @ flat_g)
                    else:
                        b._accum(a.data.swapaxes(-1, -2) @ out.grad)
            out._backward = back
        return out

    __matmul__ = matmul

    # -- shape ops ----------------------------------------------------------
    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape
        out = Tensor(self.data.reshape(shape), self.requires_grad,
                     _parents=_parents(self))
        if out.requires_grad:
            def back():
                self._accum(out.grad.reshape(old))
            out._backward = back
        return out

    def transpose(self, *axes: int) -> "Tensor":
        if not axes:
            raise UsageError("transpose needs an explicit axis permutation")
        inv = np.argsort(axes)
        out = Tensor(self.data.transpose(axes), self.requires_grad,
                     _parents=_parents(self))
        if out.requires_grad:
            def back():
                self._accum(out.grad.transpose(inv))
            out._backward = back
        return out

    def slice_axis(self, axis: int, start: int, stop: int) -> "Tensor":
        idx = [slice(None)] * self.data.ndim
        idx[axis] = slice(start, stop)
        idx = tuple(idx)
        out = Tensor(self.data[idx], self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                g = np.zeros_like(self.data)
                g[idx] = out.grad
                self._accum(g)
            out._backward = back
        return out

    def expand(self, axis: int, n: int) -> "Tensor":
        """Repeat a length-1 axis n times; gradient sums back over it."""
        if self.shape[axis] != 1:
            raise UsageError(f"expand needs a length-1 axis, shape {self.shape} "
                             f"axis {axis}")
        reps = [1] * self.data.ndim
        reps[axis] = n
        out = Tensor(np.tile(self.data, reps), self.requires_grad,
                     _parents=_parents(self))
        if out.requires_grad:
            def back():
                self._accum(out.grad.sum(axis=axis, keepdims=True))
            out._backward = back
        return out

    # -- reductions ---------------------------------------------------------
    def sum(self) -> "Tensor":
        out = Tensor(self.data.sum(), self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                self._accum(np.full_like(self.data, out.grad))
            out._backward = back
        return out

    def mean(self) -> "Tensor":
        n = self.data.size
        out = Tensor(self.data.mean(), self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                self._accum(np.full_like(self.data, out.grad / n))
            out._backward = back
        return out

    # -- nonlinearities -------------------------------------------------------
    def softmax(self) -> "Tensor":
        x = self.data
        e = np.exp(x - x.max(axis=-1, keepdims=True))
        y = e / e.sum(axis=-1, keepdims=True)
        out = Tensor(y, self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                g = out.grad
                dot = (g * y).sum(axis=-1, keepdims=True)
                self._accum(y * (g - dot))
            out._backward = back
        return out

    def layer_norm(self, eps: float = 1e-5) -> "Tensor":
        """Normalize the last axis to zero mean, unit variance; no affine.
        Scale and shift arrive externally through the conditioning path."""
        x = self.data
        mu = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        y = (x - mu) * inv
        out = Tensor(y, self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                g = out.grad
                gm = g.mean(axis=-1, keepdims=True)
                gym = (g * y).mean(axis=-1, keepdims=True)
                self._accum(inv * (g - gm - y * gym))
            out._backward = back
        return out

    def gelu(self) -> "Tensor":
        x = self.data
        c = math.sqrt(2.0 / math.pi)
        u = c * (x + 0.044715 * x ** 3)
        t = np.tanh(u)
        y = 0.5 * x * (1.0 + t)
        out = Tensor(y, self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                du = c * (1.0 + 3 * 0.044715 * x ** 2)
                dy = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t ** 2) * du
                self._accum(out.grad * dy)
            out._backward = back
        return out

    def silu(self) -> "Tensor":
        x = self.data
        sig = 1.0 / (1.0 + np.exp(-x))
        out = Tensor(x * sig, self.requires_grad, _parents=_parents(self))
        if out.requires_grad:
            def back():
                self._accum(out.grad * (sig * (1.0 + x * (1.0 - sig))))
            out._backward = back
        return out


# -- free functions ---------------------------------------------------------

def _as_tensor(v, dtype) -> Tensor:
    if isinstance(v, Tensor):
        return v
    return Tensor(np.asarray(v, dtype=dtype))


def _parents(*ts: Tensor) -> tuple:
    return tuple(t for t in ts if t.requires_grad) if _grad_enabled else ()


def _check_expandable(a: tuple, b: tuple, opname: str) -> None:
    if a == b:
        return
    if len(b) <= len(a) and a[len(a) - len(b):] == b:
        return
    if len(a) <= len(b) and b[len(b) - len(a):] == a:
        return
    raise UsageError(f"{opname} shape mismatch: {a} vs {b}")


def _unexpand(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient over the leading batch axes an operand was expanded over."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    return g.sum(axis=tuple(range(extra)))


def concat(tensors: list[Tensor], axis: int) -> Tensor:
    req = any(t.requires_grad for t in tensors)
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), req,
                 _parents=_parents(*tensors))
    if out.requires_grad:
        sizes = [t.shape[axis] for t in tensors]
        def back():
            at = 0
            for t, n in zip(tensors, sizes):
                idx = [slice(None)] * out.grad.ndim
                idx[axis] = slice(at, at + n)
                if t.requires_grad:
                    t._accum(out.grad[tuple(idx)])
                at += n
        out._backward = back
    return out


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    ids = np.asarray(ids)
    if ids.size == 0:
        raise UsageError("empty id array")
    if ids.min() < 0 or ids.max() >= table.shape[0]:
        raise UsageError(f"ids outside table of {table.shape[0]} rows")
    out = Tensor(table.data[ids], table.requires_grad, _parents=_parents(table))
    if out.requires_grad:
        def back():
            g = np.zeros_like(table.data)
            np.add.at(g, ids, out.grad)
            table._accum(g)
        out._backward = back
    return out


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    target = _as_tensor(target, pred.dtype)
    if pred.shape != target.shape:
        raise UsageError(f"mse shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return (diff * diff).mean()


def sinusoidal_features(x: Tensor, dim: int, max_period: float = 10_000.0) -> Tensor:
    """Map scalars [B] to [B, dim] sin/cos features over log-spaced periods."""
    if dim % 2 != 0:
        raise UsageError("feature dim must be even")
    half = dim // 2
    freqs = np.exp(-math.log(max_period) * np.arange(half) / half
                   ).astype(x.dtype)
    ang = x.data.reshape(-1, 1) * freqs[None, :]
    y = np.concatenate([np.cos(ang), np.sin(ang)], axis=1)
    out = Tensor(y, x.requires_grad, _parents=_parents(x))
    if out.requires_grad:
        def back():
            gc = out.grad[:, :half]
            gs = out.grad[:, half:]
            dx = (-np.sin(ang) * gc + np.cos(ang) * gs) * freqs[None, :]
            x._accum(dx.sum(axis=1).reshape(x.shape))
        out._backward = back
    return out
