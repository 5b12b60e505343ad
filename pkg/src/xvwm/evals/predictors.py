"""Predictors evaluated by the protocols: the diffusion model, the simulator
oracle, and the trivial baselines every trained model has to beat.

A predictor answers one request at a time. The request names an episode
anchor rather than carrying tensors so that oracle and baseline predictors
can reach the episode's ground truth, while the diffusion predictor only
ever touches the context frames and the conditioning record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Episode, TrainingSample, make_sample
from ..model import Denoiser, NoiseSchedule, ddim_sample
from ..worldsim import ViewId


@dataclass(frozen=True)
class EvalRequest:
    episode: Episode
    t: int                      # anchor frame; context ends here
    k: int                      # horizon, frames ahead
    src_view: ViewId
    tgt_view: ViewId
    n_ctx: int = 4

    def sample(self) -> TrainingSample:
        return make_sample(self.episode, self.t, self.k,
                           self.src_view, self.tgt_view, self.n_ctx)


class DiffusionPredictor:
    """DDIM rollout of a trained denoiser."""

    def __init__(self, model: Denoiser, schedule: NoiseSchedule,
                 steps: int = 20):
        self.model = model
        self.schedule = schedule
        self.steps = steps
        self.name = f"ddim{steps}"
        self.views: tuple[ViewId, ...] | None = model.cfg.views

    def predict(self, req: EvalRequest, rng: np.random.Generator) -> np.ndarray:
        s = req.sample()
        rel = np.array([s.rel_time], dtype=np.float32)
        cum = s.cum[None]
        rows = np.array([self.model.cfg.view_row(s.tgt_view)])
        out = ddim_sample(self.model, self.schedule, s.context[None],
                          rel, cum, rows, rng, steps=self.steps)
        return out[0]


class OraclePredictor:
    """Returns the simulator's own render of the requested target frame."""

    name = "oracle"
    views = None

    def predict(self, req: EvalRequest, rng) -> np.ndarray:
        return np.array(req.episode.frames[req.tgt_view][req.t + req.k])


class CopyLastPredictor:
    """Repeats the target-view frame at the anchor time; ignores the horizon."""

    name = "copy_last"
    views = None

    def predict(self, req: EvalRequest, rng) -> np.ndarray:
        return np.array(req.episode.frames[req.tgt_view][req.t])


class ConstantGrayPredictor:
    name = "gray"
    views = None

    def predict(self, req: EvalRequest, rng) -> np.ndarray:
        size = req.episode.size
        return np.full((size, size, 3), 128, dtype=np.uint8)
