"""Deterministic DDIM generation.

eta is fixed at zero: given the initial noise draw, the whole reverse
trajectory is a function of the parameters and inputs, which keeps frame
generation reproducible from a seed and bisectable when it regresses.
"""

from __future__ import annotations

import numpy as np

from ..nn import no_grad
from .network import Denoiser
from .patches import to_model_scale, to_u8
from .schedule import NoiseSchedule


def ddim_timesteps(t_diff: int, steps: int) -> np.ndarray:
    """Descending subset of diffusion steps, endpoints included."""
    if not 1 <= steps <= t_diff:
        raise ValueError(f"steps must be in [1, {t_diff}]")
    ts = np.linspace(t_diff - 1, 0, steps).round().astype(np.int64)
    return np.unique(ts)[::-1]


def ddim_sample(model: Denoiser, schedule: NoiseSchedule,
                context: np.ndarray, rel_time: np.ndarray, cum: np.ndarray,
                views, rng: np.random.Generator, steps: int = 20,
                init_noise: np.ndarray | None = None) -> np.ndarray:
    """Generate u8 frames [B,S,S,3] from u8 context [B,n_ctx,S,S,3]."""
    cfg = model.cfg
    b = context.shape[0]
    s = cfg.image_size
    ts = ddim_timesteps(schedule.t_diff, steps)

    x = init_noise if init_noise is not None else \
        rng.standard_normal(size=(b, s, s, 3)).astype(np.float32)
    ctx = to_model_scale(context)

    with no_grad():
        for i, t in enumerate(ts):
            c = model.conditioning(np.full(b, t), rel_time, cum, views)
            eps = model.forward(x, ctx, c).data
            ab = schedule.alpha_bar[t]
            x0 = (x - np.sqrt(1.0 - ab) * eps) / np.sqrt(ab)
            x0 = np.clip(x0, -1.0, 1.0)
            ab_prev = schedule.alpha_bar[ts[i + 1]] if i + 1 < len(ts) else 1.0
            x = (np.sqrt(ab_prev) * x0
                 + np.sqrt(1.0 - ab_prev) * eps).astype(np.float32)
    return to_u8(x)
