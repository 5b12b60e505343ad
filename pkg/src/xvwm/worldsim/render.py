"""View dispatch: one entry point for all four camera rigs.

Ego renders from the agent's eye. The shoulder camera floats behind and
above, pitched down, and draws the agent's back; the front camera floats
ahead, looks back at the agent, and draws its face. Both third-person rigs
pull the camera in along the view axis when a wall would swallow it, and
occlude the sprite column by column against the wall depth buffer.
"""

from __future__ import annotations

import math

import numpy as np

from .bev import render_bev
from .motion import is_free
from .raycast import render_first_person
from .types import AgentState, RenderConfig, ViewId, World

BODY_RGB = (46, 52, 96)
HELMET_RGB = (208, 202, 182)
EYE_RGB = (18, 18, 28)
AGENT_TOP = 0.6           # agent height in wall units
CAM_CLEARANCE = 0.12


def _pull_back(world: World, x: float, y: float, yaw: float,
               distance: float, sign: float) -> tuple[float, float, float]:
    """Camera position ``distance`` along +-forward, shortened to free space."""
    fx, fy = math.cos(yaw), math.sin(yaw)
    t = distance
    while t > 0.2:
        cx, cy = x + sign * fx * t, y + sign * fy * t
        if is_free(world, cx, cy, CAM_CLEARANCE):
            return cx, cy, t
        t -= 0.05
    return x, y, 0.2


def _stamp_agent(img: np.ndarray, depth: np.ndarray, d0: float,
                 cam_height: float, tilt_deg: float, rcfg: RenderConfig,
                 with_face: bool) -> None:
    """Draw the agent sprite at screen center, perp distance d0 ahead."""
    size = rcfg.size
    focal = (size / 2.0) / math.tan(math.radians(rcfg.fov_deg) / 2.0)
    horizon = size / 2.0 - focal * math.tan(math.radians(tilt_deg))

    row_of = lambda z: horizon + focal * (cam_height - z) / d0
    top, bot = row_of(AGENT_TOP), row_of(0.0)
    cx = size / 2.0
    hw = focal * 0.25 / d0

    r0, r1 = max(int(math.floor(top)), 0), min(int(math.ceil(bot)), size)
    c0, c1 = max(int(math.floor(cx - hw)), 0), min(int(math.ceil(cx + hw)) + 1, size)
    if r0 >= r1 or c0 >= c1:
        return
    rows = np.arange(r0, r1, dtype=np.float32)[:, None] + 0.5
    cols = np.arange(c0, c1, dtype=np.float32)[None, :] + 0.5
    h = max(bot - top, 1e-6)
    frac = np.clip((rows - top) / h, 0.0, 1.0)

    body = np.abs(cols - cx) <= hw * (0.55 + 0.45 * frac)
    helmet = body & (frac < 0.28)
    visible = depth[c0:c1][None, :] > d0

    block = img[r0:r1, c0:c1]
    block[body & visible] = BODY_RGB
    block[helmet & visible] = HELMET_RGB
    if with_face:
        for sx in (-0.45, 0.45):
            eye = ((cols - (cx + sx * hw)) ** 2 +
                   (rows - (top + 0.16 * h)) ** 2) <= (0.16 * hw) ** 2
            block[eye & body & visible] = EYE_RGB


def render(world: World, state: AgentState, view: ViewId,
           rcfg: RenderConfig = RenderConfig()) -> np.ndarray:
    """Render one u8 RGB frame [size, size, 3] of the agent in its world."""
    x, y, yaw = state.x, state.y, state.yaw
    if view == ViewId.BEV:
        return render_bev(world, x, y, yaw, rcfg)

    if view == ViewId.EGO:
        img, _ = render_first_person(world, x, y, yaw, rcfg.cam_height, 0.0,
                                     world.sky_id, rcfg)
        return img

    if view == ViewId.OVER_SHOULDER:
        cx, cy, d0 = _pull_back(world, x, y, yaw, rcfg.os_distance, sign=-1.0)
        img, depth = render_first_person(world, cx, cy, yaw, rcfg.os_height,
                                         rcfg.os_tilt_deg, world.sky_id, rcfg)
        _stamp_agent(img, depth, d0, rcfg.os_height, rcfg.os_tilt_deg, rcfg,
                     with_face=False)
        return img

    if view == ViewId.FRONT:
        cx, cy, d0 = _pull_back(world, x, y, yaw, rcfg.front_distance, sign=1.0)
        back_yaw = yaw + math.pi
        img, depth = render_first_person(world, cx, cy, back_yaw,
                                         rcfg.front_height,
                                         rcfg.front_tilt_deg, world.sky_id, rcfg)
        _stamp_agent(img, depth, d0, rcfg.front_height, rcfg.front_tilt_deg,
                     rcfg, with_face=True)
        return img

    raise ValueError(f"unknown view {view!r}")


def render_views(world: World, state: AgentState, views: tuple[ViewId, ...],
                 rcfg: RenderConfig = RenderConfig()) -> dict[ViewId, np.ndarray]:
    return {v: render(world, state, v, rcfg) for v in views}
