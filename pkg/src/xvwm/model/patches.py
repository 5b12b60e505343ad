"""Frame tokenization: non-overlapping patches via pure reshaping.

patchify_raw and unpatchify_raw are exact inverses on the raw patch
vectors; the learned projection happens elsewhere, so the round trip is a
permutation and bit-exact.
"""

from __future__ import annotations

import numpy as np

from ..errors import UsageError


def to_model_scale(frames: np.ndarray) -> np.ndarray:
    """u8 [0,255] to f32 [-1,1]."""
    return (frames.astype(np.float32) / 127.5) - 1.0


def to_u8(x: np.ndarray) -> np.ndarray:
    """f [-1,1] to u8, clamped."""
    return np.clip((x + 1.0) * 127.5, 0.0, 255.0).round().astype(np.uint8)


def patchify_raw(frames: np.ndarray, patch: int) -> np.ndarray:
    """[..., S, S, 3] to [..., N, patch*patch*3], row-major patch order."""
    *lead, s, s2, c = frames.shape
    if s != s2 or s % patch != 0:
        raise UsageError(f"cannot patchify {frames.shape} with patch {patch}")
    g = s // patch
    x = frames.reshape(*lead, g, patch, g, patch, c)
    x = np.moveaxis(x, -3, -4)                       # [..., g, g, p, p, c]
    return x.reshape(*lead, g * g, patch * patch * c)


def unpatchify_raw(tokens: np.ndarray, patch: int, size: int) -> np.ndarray:
    """Inverse of patchify_raw back to [..., size, size, 3]."""
    *lead, n, pd = tokens.shape
    g = size // patch
    if n != g * g or pd != patch * patch * 3:
        raise UsageError(f"cannot unpatchify {tokens.shape} to size {size} "
                         f"patch {patch}")
    x = tokens.reshape(*lead, g, g, patch, patch, 3)
    x = np.moveaxis(x, -3, -4)                       # [..., g, p, g, p, c]
    return x.reshape(*lead, size, size, 3)


def pos_embed_2d(dim: int, grid: int) -> np.ndarray:
    """Fixed 2-D sin/cos position table [grid*grid, dim], f32."""
    if dim % 4 != 0:
        raise UsageError("position embedding dim must be divisible by 4")
    half = dim // 2

    def axis_embed(pos: np.ndarray) -> np.ndarray:
        omega = np.arange(half // 2, dtype=np.float64) / (half / 2.0)
        omega = 1.0 / 10000 ** omega
        out = np.einsum("m,d->md", pos, omega)
        return np.concatenate([np.sin(out), np.cos(out)], axis=1)

    coords = np.arange(grid, dtype=np.float64)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    emb = np.concatenate([axis_embed(yy.reshape(-1)),
                          axis_embed(xx.reshape(-1))], axis=1)
    return emb.astype(np.float32)
