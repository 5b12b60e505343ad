"""Denoising objective on batched training samples."""

from __future__ import annotations

import numpy as np

from ..data import TrainingSample
from ..nn import Tensor, mse_loss
from .network import Denoiser
from .patches import to_model_scale
from .schedule import NoiseSchedule


def collate(samples: list[TrainingSample], cfg) -> dict[str, np.ndarray]:
    """Stack samples into batch arrays; views become table rows."""
    return {
        "context": np.stack([s.context for s in samples]),
        "target": np.stack([s.target for s in samples]),
        "rel_time": np.array([s.rel_time for s in samples], dtype=np.float32),
        "cum": np.stack([s.cum for s in samples]),
        "view_rows": np.array([cfg.view_row(s.tgt_view) for s in samples]),
        "descriptor": [(s.episode_id, s.t, s.k, int(s.src_view), int(s.tgt_view))
                       for s in samples],
    }


def training_loss(model: Denoiser, schedule: NoiseSchedule,
                  batch: dict[str, np.ndarray],
                  rng: np.random.Generator) -> Tensor:
    """MSE between predicted and true noise at a random diffusion step."""
    target = batch["target"]
    b = target.shape[0]
    t = rng.integers(0, schedule.t_diff, size=b)
    eps = rng.standard_normal(size=target.shape).astype(np.float32)
    x0 = to_model_scale(target)
    xt = schedule.q_sample(x0, t, eps)
    c = model.conditioning(t, batch["rel_time"], batch["cum"],
                           batch["view_rows"])
    eps_hat = model.forward(xt, to_model_scale(batch["context"]), c)
    return mse_loss(eps_hat, Tensor(eps.astype(eps_hat.dtype)))
