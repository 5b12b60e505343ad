"""Pixel-space quality metrics and bootstrap confidence intervals.

Learned perceptual metrics need pretrained backbones; at this scale we use
mse, psnr and ssim instead, and every report that carries these numbers says
so in its header.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import UsageError

# ssim on unit-scale images, standard constants
_C1 = 0.01 ** 2
_C2 = 0.03 ** 2
_WINDOW = 8

METRIC_NAMES = ("mse", "psnr", "ssim")

# larger-is-better flags; used when picking the best score over variants
METRIC_ASCENDING = {"mse": False, "psnr": True, "ssim": True}


def _to_unit(frame: np.ndarray) -> np.ndarray:
    a = np.asarray(frame)
    if a.dtype == np.uint8:
        return a.astype(np.float64) / 255.0
    return a.astype(np.float64)


def ssim(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean SSIM over non-overlapping 8x8 windows and channels.

    Inputs are [H,W] or [H,W,C] on [0,1] scale (u8 accepted). Rows and
    columns past the last full window are dropped.
    """
    p, g = _to_unit(pred), _to_unit(gt)
    if p.shape != g.shape:
        raise UsageError(f"ssim shapes differ: {p.shape} vs {g.shape}")
    if p.ndim == 2:
        p, g = p[..., None], g[..., None]
    h, w, c = p.shape
    ny, nx = h // _WINDOW, w // _WINDOW
    if ny == 0 or nx == 0:
        raise UsageError(f"image {h}x{w} smaller than the {_WINDOW}px window")
    p = p[:ny * _WINDOW, :nx * _WINDOW]
    g = g[:ny * _WINDOW, :nx * _WINDOW]
    # [ny, nx, c, window pixels]
    pw = p.reshape(ny, _WINDOW, nx, _WINDOW, c).transpose(0, 2, 4, 1, 3) \
        .reshape(ny, nx, c, -1)
    gw = g.reshape(ny, _WINDOW, nx, _WINDOW, c).transpose(0, 2, 4, 1, 3) \
        .reshape(ny, nx, c, -1)
    mp, mg = pw.mean(axis=-1), gw.mean(axis=-1)
    # var through the same moment formula as cov, so identical inputs give
    # exactly cov == var and the score lands on 1.0
    vp = (pw * pw).mean(axis=-1) - mp * mp
    vg = (gw * gw).mean(axis=-1) - mg * mg
    cov = (pw * gw).mean(axis=-1) - mp * mg
    s = ((2 * mp * mg + _C1) * (2 * cov + _C2)) \
        / ((mp ** 2 + mg ** 2 + _C1) * (vp + vg + _C2))
    return float(np.clip(s, -1.0, 1.0).mean())


def pixel_metrics(pred: np.ndarray, gt: np.ndarray) -> dict[str, float]:
    """mse / psnr / ssim between two frames of equal shape.

    mse is on [0,1] scale; psnr = 10 log10(1/mse), pinned to 99 dB once
    mse drops below 1e-10.
    """
    p, g = np.asarray(pred), np.asarray(gt)
    if p.shape != g.shape:
        raise UsageError(f"frame shapes differ: {p.shape} vs {g.shape}")
    pf, gf = _to_unit(p), _to_unit(g)
    mse = float(np.mean((pf - gf) ** 2))
    psnr = 99.0 if mse < 1e-10 else 10.0 * math.log10(1.0 / mse)
    return {"mse": mse, "psnr": psnr, "ssim": ssim(p, g)}


def best_metrics(candidates: list[dict[str, float]]) -> dict[str, float]:
    """Per-metric best over candidate scores (min mse, max psnr/ssim)."""
    if not candidates:
        raise UsageError("no candidate scores")
    out = {}
    for name in candidates[0]:
        vals = [c[name] for c in candidates]
        out[name] = max(vals) if METRIC_ASCENDING.get(name, True) else min(vals)
    return out


def bootstrap_ci(values, seed: int = 0, n_resamples: int = 1000,
                 alpha: float = 0.05, stat=np.mean) -> tuple[float, float]:
    """Percentile bootstrap CI of `stat` over `values`; deterministic in seed."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise UsageError("bootstrap needs a non-empty 1-d sample")
    rng = np.random.default_rng(np.random.SeedSequence([0x42535452, seed]))
    idx = rng.integers(0, v.size, size=(n_resamples, v.size))
    stats = stat(v[idx], axis=1)
    lo, hi = np.quantile(stats, [alpha / 2, 1.0 - alpha / 2])
    return float(lo), float(hi)
