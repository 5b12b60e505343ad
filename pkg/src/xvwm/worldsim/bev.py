"""Top-down schematic renderer.

The static part of the map (floor, walls, landmark glyphs) depends only on
the world and the image size, so it is rasterized once and cached; per-frame
work is a copy plus the agent marker stamp. The bird's eye view never reads
the sky: two worlds differing only in sky id produce identical frames here.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from ..errors import DomainError
from .types import RenderConfig, World
from .world import LANDMARK_COLORS, WALL_COLORS

FLOOR_GRAY = 190          # uniform so marker blends stay linear in coverage
WALL_DIM = 0.45           # walls drawn as dimmed versions of their mural color
MARKER_RGB = (255, 0, 0)  # reserved: nothing else in any palette is red-dominant


def project_to_bev(world: World, x: float, y: float, size: int) -> tuple[float, float]:
    """World position to continuous BEV image coordinates (u right, v down).

    Pixel (i, j) covers [i, i+1) x [j, j+1), so the arena center lands on
    (size/2, size/2) exactly. Positions outside the arena are refused.
    """
    if not (0.0 <= x <= world.side and 0.0 <= y <= world.side):
        raise DomainError(f"position ({x:.3f}, {y:.3f}) outside [0, {world.side}]^2")
    scale = size / world.side
    return x * scale, y * scale


def _supersample_grid(ss: int) -> tuple[np.ndarray, np.ndarray]:
    off = (np.arange(ss, dtype=np.float64) + 0.5) / ss
    oy, ox = np.meshgrid(off, off, indexing="ij")
    return ox.ravel(), oy.ravel()


@functools.lru_cache(maxsize=32)
def static_map(world: World, size: int) -> np.ndarray:
    """Rasterize floor, walls and landmark glyphs; read-only u8 [size,size,3]."""
    side = world.side
    scale = size / side
    img = np.full((size, size, 3), FLOOR_GRAY, dtype=np.float32)

    # walls: nearest-cell lookup per pixel, dimmed mural color
    px = (np.arange(size, dtype=np.float64) + 0.5) / scale
    ix = np.clip(px.astype(np.int64), 0, side - 1)
    cell_x = np.broadcast_to(ix[None, :], (size, size))
    cell_y = np.broadcast_to(ix[:, None], (size, size))
    occ = world.occupancy[cell_y, cell_x] > 0
    tex = world.wall_tex[cell_y, cell_x]
    palette = np.array([(40, 40, 48)] + [WALL_COLORS[i] for i in sorted(WALL_COLORS)],
                       dtype=np.float32) * WALL_DIM
    wall_px = palette[np.clip(tex, 0, len(palette) - 1)]
    img = np.where(occ[..., None], wall_px, img)

    # landmark glyphs: supersampled shape masks over their cell, drawn on top
    ss = 4
    ox, oy = _supersample_grid(ss)
    for i, lm in enumerate(world.landmarks):
        cx, cy = lm.x * scale, lm.y * scale   # landmark position is the cell center
        rad = 0.42 * scale
        lo_u, hi_u = int(math.floor(cx - rad)), int(math.ceil(cx + rad))
        lo_v, hi_v = int(math.floor(cy - rad)), int(math.ceil(cy + rad))
        for v in range(max(lo_v, 0), min(hi_v, size)):
            for u in range(max(lo_u, 0), min(hi_u, size)):
                sx = u + ox - cx
                sy = v + oy - cy
                if lm.shape == "circle":
                    inside = sx * sx + sy * sy <= rad * rad
                elif lm.shape == "square":
                    inside = (np.abs(sx) <= rad * 0.85) & (np.abs(sy) <= rad * 0.85)
                else:  # diamond
                    inside = np.abs(sx) + np.abs(sy) <= rad * 1.2
                a = inside.mean()
                if a > 0.0:
                    img[v, u] = a * np.array(lm.color, np.float32) + (1 - a) * img[v, u]

    out = np.clip(img, 0, 255).astype(np.uint8)
    out.setflags(write=False)
    return out


def marker_vertices(u: float, v: float, yaw: float, size: int,
                    rcfg: RenderConfig) -> np.ndarray:
    """Triangle vertices, image coords, area centroid exactly at (u, v).

    Tip sits 2L/3 ahead of the anchor, the base L/3 behind, so the mean of
    the three vertices is the anchor itself.
    """
    length = rcfg.marker_len_ratio * size
    half_w = 0.5 * rcfg.marker_width_ratio * length
    du, dv = math.cos(yaw), math.sin(yaw)   # image v grows downward = world +y
    pu, pv = -dv, du
    tip = (u + 2.0 * length / 3.0 * du, v + 2.0 * length / 3.0 * dv)
    base = (u - length / 3.0 * du, v - length / 3.0 * dv)
    c1 = (base[0] + half_w * pu, base[1] + half_w * pv)
    c2 = (base[0] - half_w * pu, base[1] - half_w * pv)
    return np.array([tip, c1, c2], dtype=np.float64)


def stamp_marker(img: np.ndarray, world: World, x: float, y: float, yaw: float,
                 rcfg: RenderConfig) -> None:
    """Alpha-blend the red agent marker into ``img`` in place.

    Coverage per pixel comes from an ss x ss subsample grid, so on the
    uniform floor the blended red excess (R - G) is proportional to the
    covered area, which keeps the detected centroid at the true position.
    """
    size = img.shape[0]
    u, v = project_to_bev(world, x, y, size)
    verts = marker_vertices(u, v, yaw, size, rcfg)

    lo = np.floor(verts.min(axis=0)).astype(int)
    hi = np.ceil(verts.max(axis=0)).astype(int)
    lo_u, lo_v = max(lo[0], 0), max(lo[1], 0)
    hi_u, hi_v = min(hi[0], size), min(hi[1], size)
    if lo_u >= hi_u or lo_v >= hi_v:
        return

    ss = rcfg.supersample
    ox, oy = _supersample_grid(ss)
    us = (np.arange(lo_u, hi_u)[:, None] + ox[None, :])          # [W, ss*ss]
    vs = (np.arange(lo_v, hi_v)[:, None] + oy[None, :])          # [H, ss*ss]
    pu = us[None, :, :]                                          # [1, W, n]
    pv = vs[:, None, :]                                          # [H, 1, n]

    cover = np.ones((hi_v - lo_v, hi_u - lo_u, ss * ss), dtype=bool)
    for i in range(3):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % 3]
        # half-plane test; vertex order fixes the sign convention
        side = (bx - ax) * (pv - ay) - (by - ay) * (pu - ax)
        cover &= side >= 0.0
    alpha = cover.mean(axis=2, dtype=np.float64)[..., None]

    block = img[lo_v:hi_v, lo_u:hi_u].astype(np.float64)
    red = np.array(MARKER_RGB, dtype=np.float64)
    img[lo_v:hi_v, lo_u:hi_u] = np.clip(
        alpha * red + (1.0 - alpha) * block, 0, 255).round().astype(np.uint8)


def render_bev(world: World, x: float, y: float, yaw: float,
               rcfg: RenderConfig) -> np.ndarray:
    frame = static_map(world, rcfg.size).copy()
    stamp_marker(frame, world, x, y, yaw, rcfg)
    return frame
