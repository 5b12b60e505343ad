"""Training sample assembly.

A sample pairs a short clip from a source camera with one target frame
from a (possibly different) camera offset by k steps, plus the pose change
over that gap expressed in the agent frame of the anchor step. Computing
the change from stored poses rather than summing per-step commands keeps
it exact even when the agent spent part of the gap pressed against walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import RangeError
from ..worldsim import ViewId, wrap_angle
from .episode import Episode


@dataclass(frozen=True)
class TrainingSample:
    context: np.ndarray         # u8 [n_ctx, S, S, 3], chronological, ends at t
    target: np.ndarray          # u8 [S, S, 3] at t + k
    cum: np.ndarray             # f32 [3]: (dx, dy, dyaw) in the frame at t
    rel_time: float             # seconds, k / fps
    src_view: ViewId
    tgt_view: ViewId
    episode_id: int
    t: int
    k: int


def cum_action(poses: np.ndarray, t: int, k: int) -> np.ndarray:
    """Pose change from step t to t+k in the agent frame at t; f32 [3]."""
    p0 = poses[t].astype(np.float64)
    p1 = poses[t + k].astype(np.float64)
    dxw, dyw = p1[0] - p0[0], p1[1] - p0[1]
    c, s = math.cos(p0[2]), math.sin(p0[2])
    return np.float32([dxw * c + dyw * s,
                       -dxw * s + dyw * c,
                       wrap_angle(p1[2] - p0[2])])


def compose_actions(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Chain two agent-frame pose changes: a covers t..t+i, b covers t+i..t+j."""
    ax, ay, ar = float(a[0]), float(a[1]), float(a[2])
    bx, by, br = float(b[0]), float(b[1]), float(b[2])
    c, s = math.cos(ar), math.sin(ar)
    return np.float32([ax + bx * c - by * s,
                       ay + bx * s + by * c,
                       wrap_angle(ar + br)])


def make_sample(ep: Episode, t: int, k: int, src_view: ViewId,
                tgt_view: ViewId, n_ctx: int = 4) -> TrainingSample:
    """Cut one sample out of an episode; bounds are refused, not clipped."""
    if src_view not in ep.frames or tgt_view not in ep.frames:
        raise RangeError(f"episode {ep.episode_id} lacks view "
                         f"{src_view.short_name}/{tgt_view.short_name}")
    if n_ctx < 1:
        raise RangeError("need at least one context frame")
    if t - n_ctx + 1 < 0 or t >= ep.length:
        raise RangeError(f"anchor t={t} leaves no room for {n_ctx} context frames")
    if not 0 <= t + k < ep.length:
        raise RangeError(f"target t+k={t + k} outside episode of {ep.length}")

    context = np.asarray(ep.frames[src_view][t - n_ctx + 1:t + 1])
    target = np.asarray(ep.frames[tgt_view][t + k])
    return TrainingSample(
        context=context, target=target,
        cum=cum_action(ep.poses, t, k),
        rel_time=float(k / ep.fps),
        src_view=src_view, tgt_view=tgt_view,
        episode_id=ep.episode_id, t=t, k=k,
    )
