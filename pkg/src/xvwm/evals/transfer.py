"""Exposure-matched transfer study: ego-to-ego quality as a function of how
many ego-to-ego pairs each model actually saw during training.

Checkpoints carry per-pair exposure counters; a single-view run contributes
a curve through its intermediate checkpoints, multi-view runs contribute
points at their effective exposures.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data import Episode
from ..errors import ConfigurationError, FormatError
from ..model import restore_model
from ..worldsim import ViewId
from .metrics import bootstrap_ci, pixel_metrics
from .predictors import DiffusionPredictor, EvalRequest
from .protocols import EvalProtocol, _eval_rng, anchor_times

_EGO_PAIR = "ego:ego"


@dataclass(frozen=True)
class TransferPoint:
    label: str
    scheme: str
    step: int
    exposure: int               # ego:ego pairs seen in training
    mse: float
    ci_lo: float
    ci_hi: float
    n: int


@dataclass(frozen=True)
class TransferStudy:
    horizon: int
    points: tuple[TransferPoint, ...]


def _load_model(path: Path):
    model, schedule, ck = restore_model(path)
    if "exposure" not in ck.extra or _EGO_PAIR not in ck.extra["exposure"]:
        raise FormatError(f"{path}: checkpoint carries no {_EGO_PAIR} "
                          "exposure counter")
    return model, schedule, ck


def transfer_study(checkpoints: list[str | Path], episodes: list[Episode],
                   protocol: EvalProtocol = EvalProtocol(),
                   ddim_steps: int = 20, seed: int = 0,
                   n_resamples: int = 1000) -> TransferStudy:
    """Evaluate ego-to-ego mse at the protocol horizon for every checkpoint.

    All checkpoints must agree on image size, view vocabulary and context
    length with each other and with the episodes; a disagreement means the
    points are not comparable and is refused. The first checkpoint sets the
    context length actually used, whatever the protocol says.
    """
    protocol.validate()
    if not checkpoints:
        raise ConfigurationError("no checkpoints to study")
    if not episodes:
        raise ConfigurationError("no episodes to evaluate")

    points = []
    ref_cfg = None
    for path in checkpoints:
        path = Path(path)
        model, sched, ck = _load_model(path)
        cfg = model.cfg
        if ref_cfg is None:
            ref_cfg = cfg
            if cfg.image_size != episodes[0].size:
                raise ConfigurationError(
                    f"{path}: model renders {cfg.image_size}px, episodes "
                    f"are {episodes[0].size}px")
            protocol = dataclasses.replace(protocol, n_ctx=cfg.context_len)
        elif (cfg.image_size, cfg.views, cfg.context_len) != \
                (ref_cfg.image_size, ref_cfg.views, ref_cfg.context_len):
            raise ConfigurationError(
                f"{path}: evaluation protocol mismatch, model "
                f"({cfg.image_size}px, {[v.short_name for v in cfg.views]}, "
                f"{cfg.context_len} ctx) vs ({ref_cfg.image_size}px, "
                f"{[v.short_name for v in ref_cfg.views]}, "
                f"{ref_cfg.context_len} ctx)")

        pred = DiffusionPredictor(model, sched, steps=ddim_steps)
        rng = _eval_rng(seed)
        errs = []
        for ep in episodes:
            for t in anchor_times(ep.length, protocol):
                frame = pred.predict(
                    EvalRequest(ep, t, protocol.horizon, ViewId.EGO,
                                ViewId.EGO, protocol.n_ctx), rng)
                gt = ep.frames[ViewId.EGO][t + protocol.horizon]
                errs.append(pixel_metrics(frame, gt)["mse"])
        lo, hi = bootstrap_ci(errs, seed=seed, n_resamples=n_resamples)
        points.append(TransferPoint(
            label=path.stem,
            scheme=str(ck.extra.get("scheme", "?")),
            step=ck.step,
            exposure=int(ck.extra["exposure"][_EGO_PAIR]),
            mse=float(np.mean(errs)), ci_lo=lo, ci_hi=hi, n=len(errs)))
    return TransferStudy(protocol.horizon, tuple(points))
