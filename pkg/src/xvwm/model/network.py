"""The denoiser: a conditional transformer over target-frame patches.

Target tokens pass through L blocks of adaLN-modulated self-attention,
cross-attention into the context tokens, and an MLP. All nine modulation
signals per block (shift/scale/gate for each sub-layer) come from one
linear layer on the conditioning vector, initialized to zero: at init
every gate is closed, the blocks are identity, and the output is exactly
the head applied to the projected noisy input. The head itself is
randomly initialized rather than zeroed, so the first backward pass sends
nonzero gradient into the modulation weights and the conditioning path
starts learning on step one.

A conditioned scalar gate also feeds the raw noisy image straight to the
output (zero at init). Working on pixels with patch_dim above dim, the
token stream alone cannot transport x_t at full rank, and the epsilon
target is mostly a per-t multiple of x_t.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import UsageError
from ..nn import Embedding, Linear, Module, Tensor, embedding_lookup, \
    sinusoidal_features
from ..worldsim import ViewId
from .config import ModelConfig
from .patches import patchify_raw, pos_embed_2d


def _attention(q: Tensor, k: Tensor, v: Tensor, heads: int) -> Tensor:
    b, n, d = q.shape
    m = k.shape[1]
    dh = d // heads
    q = q.reshape(b, n, heads, dh).transpose(0, 2, 1, 3)
    k = k.reshape(b, m, heads, dh).transpose(0, 2, 1, 3)
    v = v.reshape(b, m, heads, dh).transpose(0, 2, 1, 3)
    att = q.matmul(k.transpose(0, 1, 3, 2)).scale(1.0 / math.sqrt(dh)).softmax()
    out = att.matmul(v).transpose(0, 2, 1, 3).reshape(b, n, d)
    return out


def _per_token(vec: Tensor, n: int) -> Tensor:
    """[B,d] -> [B,n,d] for token-wise modulation."""
    b, d = vec.shape
    return vec.reshape(b, 1, d).expand(1, n)


def _modulate(x: Tensor, shift: Tensor, scale: Tensor) -> Tensor:
    n = x.shape[1]
    return x + x * _per_token(scale, n) + _per_token(shift, n)


class Mlp(Module):
    def __init__(self, d_in: int, d_hidden: int, d_out: int, rng,
                 std: float = 0.02, std2: float | None = None,
                 dtype=np.float32):
        self.fc1 = Linear(d_in, d_hidden, rng, std=std, dtype=dtype)
        self.fc2 = Linear(d_hidden, d_out, rng,
                          std=std if std2 is None else std2, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(self.fc1(x).silu())


class ConditioningEmbedder(Module):
    """c = MLP(sin(t_diff)) + MLP(sin(rel_time)) + MLP(action) + view row.

    The action features are (dx, dy, sin dphi, cos dphi): angles enter
    through the circle so a wrap at pi costs nothing.
    """

    def __init__(self, cfg: ModelConfig, rng, dtype=np.float32):
        d, f = cfg.dim, cfg.freq_dim
        # fan-in scaled init: the modulation layer downstream is zeroed, so
        # c has to arrive at O(1) or that layer spends its whole step budget
        # growing weights before the gates move at all
        s2 = math.sqrt(2.0 / d)
        self.t_mlp = Mlp(f, d, d, rng, std=math.sqrt(2.0 / f), std2=s2,
                         dtype=dtype)
        self.r_mlp = Mlp(f, d, d, rng, std=math.sqrt(2.0 / f), std2=s2,
                         dtype=dtype)
        self.a_mlp = Mlp(4, d, d, rng, std=0.5, std2=s2, dtype=dtype)
        self.view_table = Embedding(len(cfg.views), d, rng, std=0.1,
                                    dtype=dtype)
        self._freq = f
        self._dtype = dtype

    def __call__(self, t_diff: np.ndarray, rel_time: np.ndarray,
                 cum: np.ndarray, view_rows: np.ndarray) -> Tensor:
        dt = self._dtype
        tf = sinusoidal_features(Tensor(np.asarray(t_diff, dtype=dt)), self._freq)
        rf = sinusoidal_features(Tensor(np.asarray(rel_time, dtype=dt)), self._freq)
        cum = np.asarray(cum, dtype=np.float64)
        act = np.stack([cum[:, 0], cum[:, 1],
                        np.sin(cum[:, 2]), np.cos(cum[:, 2])], axis=1).astype(dt)
        c = self.t_mlp(tf) + self.r_mlp(rf) + self.a_mlp(Tensor(act))
        return c + embedding_lookup(self.view_table.weight, view_rows)


class CDiTBlock(Module):
    def __init__(self, dim: int, heads: int, rng, zero_gates: bool = True,
                 dtype=np.float32):
        if dim % heads != 0:
            raise UsageError(f"dim {dim} not divisible by heads {heads}")
        std = 0.02
        self.heads = heads
        # zero-init closes every gate; tests may open them with random init
        self.mod = Linear(dim, 9 * dim, rng, std=0.0 if zero_gates else std,
                          dtype=dtype)
        self.sa_qkv = Linear(dim, 3 * dim, rng, std=std, dtype=dtype)
        self.sa_out = Linear(dim, dim, rng, std=std, dtype=dtype)
        self.ca_q = Linear(dim, dim, rng, std=std, dtype=dtype)
        self.ca_kv = Linear(dim, 2 * dim, rng, std=std, dtype=dtype)
        self.ca_out = Linear(dim, dim, rng, std=std, dtype=dtype)
        self.mlp = Mlp(dim, 4 * dim, dim, rng, std=std, dtype=dtype)

    def __call__(self, x: Tensor, ctx: Tensor, c: Tensor) -> Tensor:
        d = x.shape[-1]
        n = x.shape[1]
        m = self.mod(c.silu())
        sh_sa, sc_sa, g_sa, sh_ca, sc_ca, g_ca, sh_ml, sc_ml, g_ml = (
            m.slice_axis(1, i * d, (i + 1) * d) for i in range(9))

        h = _modulate(x.layer_norm(), sh_sa, sc_sa)
        qkv = self.sa_qkv(h)
        q = qkv.slice_axis(2, 0, d)
        k = qkv.slice_axis(2, d, 2 * d)
        v = qkv.slice_axis(2, 2 * d, 3 * d)
        x = x + self.sa_out(_attention(q, k, v, self.heads)) * _per_token(g_sa, n)

        h = _modulate(x.layer_norm(), sh_ca, sc_ca)
        kv = self.ca_kv(ctx.layer_norm())
        dk = ctx.shape[-1]
        k = kv.slice_axis(2, 0, dk)
        v = kv.slice_axis(2, dk, 2 * dk)
        x = x + self.ca_out(_attention(self.ca_q(h), k, v, self.heads)) \
            * _per_token(g_ca, n)

        h = _modulate(x.layer_norm(), sh_ml, sc_ml)
        x = x + self.mlp(h) * _per_token(g_ml, n)
        return x


class Denoiser(Module):
    """Predicts the noise added to a target frame, given context frames in
    some view and the conditioning record."""

    def __init__(self, cfg: ModelConfig, rng, zero_gates: bool = True,
                 dtype=np.float32):
        cfg.validate()
        self.cfg = cfg
        d = cfg.dim
        grid = cfg.image_size // cfg.patch
        self.ctx_proj = Linear(cfg.patch_dim, d, rng, dtype=dtype)
        self.tgt_proj = Linear(cfg.patch_dim, d, rng, dtype=dtype)
        self.pos = Tensor(pos_embed_2d(d, grid).astype(dtype))   # fixed table
        self.temporal = Tensor(
            rng.normal(0.0, 0.02, size=(cfg.context_len, d)).astype(dtype),
            requires_grad=True)
        self.cond = ConditioningEmbedder(cfg, rng, dtype=dtype)
        self.blocks = [CDiTBlock(d, cfg.heads, rng, zero_gates, dtype)
                       for _ in range(cfg.layers)]
        self.head = Linear(d, cfg.patch_dim, rng, std=0.02, dtype=dtype)
        # conditioned passthrough of the raw noisy input. The epsilon target
        # contains x_t times a per-t scalar; routing that term through the
        # token stream would cap it at rank dim < patch_dim, so it gets its
        # own gate instead. Zero-init keeps the init-time identity exact.
        self.skip = Linear(d, 1, rng, std=0.0, dtype=dtype)
        self._dtype = dtype

    def conditioning(self, t_diff, rel_time, cum, views) -> Tensor:
        """views may be ViewIds or precomputed table rows."""
        rows = np.array([self.cfg.view_row(v) if isinstance(v, ViewId) else int(v)
                         for v in np.atleast_1d(views)])
        t_diff = np.atleast_1d(t_diff)
        if t_diff.min() < 0 or t_diff.max() >= self.cfg.t_diff:
            raise UsageError(f"t_diff outside [0, {self.cfg.t_diff})")
        return self.cond(t_diff, np.atleast_1d(rel_time),
                         np.atleast_2d(cum), rows)

    def forward(self, noisy: np.ndarray, context: np.ndarray,
                c: Tensor) -> Tensor:
        """noisy [B,S,S,3] and context [B,n_ctx,S,S,3] in [-1,1] scale;
        returns predicted noise as a [B,S,S,3] tensor."""
        cfg = self.cfg
        b, s = noisy.shape[0], cfg.image_size
        if noisy.shape != (b, s, s, 3):
            raise UsageError(f"noisy target {noisy.shape}, config wants "
                             f"[B,{s},{s},3]")
        if context.shape != (b, cfg.context_len, s, s, 3):
            raise UsageError(f"context {context.shape}, config wants "
                             f"[B,{cfg.context_len},{s},{s},3]")
        p = cfg.patch
        n = cfg.tokens_per_frame
        d = cfg.dim
        nc = cfg.context_len

        x = self.tgt_proj(Tensor(patchify_raw(noisy.astype(self._dtype), p)))
        x = x + self.pos

        ctx = self.ctx_proj(Tensor(patchify_raw(context.astype(self._dtype), p)))
        ctx = ctx + self.pos
        ctx = ctx + self.temporal.reshape(nc, 1, d).expand(1, n)
        ctx = ctx.reshape(b, nc * n, d)

        for blk in self.blocks:
            x = blk(x, ctx, c)
        eps = self.head(x)                                   # [B,N,pd]

        g = s // p
        eps = eps.reshape(b, g, g, p, p, 3).transpose(0, 1, 3, 2, 4, 5)
        eps = eps.reshape(b, s, s, 3)
        gate = self.skip(c.silu()).reshape(b, 1, 1, 1) \
            .expand(1, s).expand(2, s).expand(3, 3)
        return eps + Tensor(noisy.astype(self._dtype)) * gate
