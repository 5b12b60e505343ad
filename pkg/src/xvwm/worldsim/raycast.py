"""First-person renderer: vectorized grid DDA over image columns.

One ray per pixel column. Wall distance is the perpendicular distance to
the camera plane (no fisheye). Camera pitch is approximated by shifting
the horizon row, which keeps the column/row mapping separable; at the
small tilts used for the shoulder and front cameras the shear error is
a fraction of a pixel.
"""

from __future__ import annotations

import math

import numpy as np

from .types import RenderConfig, World
from .world import LANDMARK_COLORS, LANDMARK_TEX_BASE, WALL_COLORS

# zenith -> horizon color pairs, one per sky id (wraps if more skies asked)
SKY_PALETTES: tuple[tuple[tuple[int, int, int], tuple[int, int, int]], ...] = (
    ((40, 70, 160), (150, 190, 235)),    # clear day
    ((15, 20, 60), (90, 70, 120)),       # dusk
    ((120, 130, 150), (200, 205, 210)),  # overcast
    ((25, 90, 110), (160, 215, 200)),    # teal dawn
    ((60, 45, 110), (220, 170, 120)),    # sunset
    ((10, 12, 24), (40, 50, 80)),        # night
)

FLOOR_COLOR = np.array((92, 86, 76), dtype=np.float32)
FLOOR_CHECK = 0.22       # darkening of alternate floor cells
SUN_GAIN = 0.22          # azimuthal sky brightness swing


def ray_dirs(yaw: float, size: int, fov_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized per-column ray directions; forward component is 1, so a
    point at perpendicular distance d along column c is cam + d * rd[c]."""
    dir_x, dir_y = math.cos(yaw), math.sin(yaw)
    right_x, right_y = dir_y, -dir_x
    plane = math.tan(math.radians(fov_deg) / 2.0)
    cam = (2.0 * (np.arange(size, dtype=np.float64) + 0.5) / size - 1.0)
    return dir_x + right_x * plane * cam, dir_y + right_y * plane * cam


def cast_rays(world: World, x: float, y: float, yaw: float,
              size: int, fov_deg: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """DDA over all columns at once.

    Returns (dist, tex_id, tex_u, side):
      dist    f32[size]  perpendicular wall distance per column
      tex_id  i32[size]  texture id of the hit cell
      tex_u   f32[size]  fraction along the wall face, orientation-consistent
      side    u8[size]   0 = hit an x gridline, 1 = a y gridline
    """
    occ = world.occupancy
    side_len = world.side
    rd_x, rd_y = ray_dirs(yaw, size, fov_deg)

    map_x = np.full(size, int(x), dtype=np.int64)
    map_y = np.full(size, int(y), dtype=np.int64)

    with np.errstate(divide="ignore"):
        delta_x = np.abs(np.where(rd_x != 0.0, 1.0 / rd_x, np.inf))
        delta_y = np.abs(np.where(rd_y != 0.0, 1.0 / rd_y, np.inf))
    step_x = np.where(rd_x < 0, -1, 1)
    step_y = np.where(rd_y < 0, -1, 1)
    side_dist_x = np.where(rd_x < 0, (x - map_x) * delta_x, (map_x + 1.0 - x) * delta_x)
    side_dist_y = np.where(rd_y < 0, (y - map_y) * delta_y, (map_y + 1.0 - y) * delta_y)

    hit = np.zeros(size, dtype=bool)
    hit_side = np.zeros(size, dtype=np.uint8)
    for _ in range(4 * side_len):
        active = ~hit
        if not active.any():
            break
        take_x = active & (side_dist_x < side_dist_y)
        take_y = active & ~take_x
        map_x = map_x + np.where(take_x, step_x, 0)
        map_y = map_y + np.where(take_y, step_y, 0)
        hit_side = np.where(take_x, 0, np.where(take_y, 1, hit_side)).astype(np.uint8)
        side_dist_x = side_dist_x + np.where(take_x, delta_x, 0.0)
        side_dist_y = side_dist_y + np.where(take_y, delta_y, 0.0)
        inside = (map_x >= 0) & (map_x < side_len) & (map_y >= 0) & (map_y < side_len)
        hit = hit | (active & (~inside | (occ[np.clip(map_y, 0, side_len - 1),
                                              np.clip(map_x, 0, side_len - 1)] > 0)))
    assert hit.all(), "ray escaped a bordered world"

    dist = np.where(hit_side == 0, side_dist_x - delta_x, side_dist_y - delta_y)
    dist = np.maximum(dist, 1e-6).astype(np.float32)

    cx = np.clip(map_x, 0, side_len - 1)
    cy = np.clip(map_y, 0, side_len - 1)
    tex_id = world.wall_tex[cy, cx].astype(np.int32)

    wall_hit = np.where(hit_side == 0, y + dist * rd_y, x + dist * rd_x)
    tex_u = wall_hit - np.floor(wall_hit)
    flip = ((hit_side == 0) & (rd_x > 0)) | ((hit_side == 1) & (rd_y < 0))
    tex_u = np.where(flip, 1.0 - tex_u, tex_u).astype(np.float32)

    return dist, tex_id, tex_u, hit_side


def _texel(tex_id: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Procedural wall texel colors, f32 RGB in [0,255].

    Wall ids index the mural palette; ids at LANDMARK_TEX_BASE and above are
    landmark pillars keyed by landmark index. Patterns are cheap integer
    lattices so the same id always renders the same under any pose.
    """
    out = np.zeros(tex_id.shape + (3,), dtype=np.float32)
    is_lm = tex_id >= LANDMARK_TEX_BASE

    wall_ids = np.where(is_lm, 1, np.maximum(tex_id, 1))
    palette = np.array([WALL_COLORS[((i - 1) % len(WALL_COLORS)) + 1]
                        for i in range(1, len(WALL_COLORS) + 1)], dtype=np.float32)
    base = palette[(wall_ids - 1) % len(WALL_COLORS)]

    pat = wall_ids % 4
    band = np.ones(tex_id.shape, dtype=np.float32)
    checker = (np.floor(u * 2) + np.floor(v * 2)) % 2
    hstripe = np.floor(v * 3) % 2
    vstripe = np.floor(u * 4) % 2
    brick = ((np.floor(v * 3) % 2) * 0.5 + np.floor((u + 0.5 * np.floor(v * 3)) * 2) % 2) % 2
    band = np.where(pat == 0, 1.0 - 0.25 * checker, band)
    band = np.where(pat == 1, 1.0 - 0.20 * hstripe, band)
    band = np.where(pat == 2, 1.0 - 0.25 * vstripe, band)
    band = np.where(pat == 3, 1.0 - 0.20 * np.minimum(brick, 1.0), band)
    out[...] = base * band[..., None]

    if is_lm.any():
        lm_idx = np.where(is_lm, tex_id - LANDMARK_TEX_BASE, 0)
        lm_palette = np.array(LANDMARK_COLORS, dtype=np.float32)
        lm_base = lm_palette[lm_idx % len(LANDMARK_COLORS)]
        # shape index picks a pattern so pillars differ by more than hue
        shape = lm_idx % 3
        lm_band = np.where(shape == 0, 1.0,
                           np.where(shape == 1, 1.0 - 0.3 * checker,
                                    1.0 - 0.3 * (np.floor((u + v) * 3) % 2)))
        out = np.where(is_lm[..., None], lm_base * lm_band[..., None], out)
    return out


def render_first_person(world: World, x: float, y: float, yaw: float,
                        cam_height: float, tilt_deg: float, sky_id: int,
                        rcfg: RenderConfig) -> tuple[np.ndarray, np.ndarray]:
    """Render a first-person frame; returns (u8 image [S,S,3], wall depth [S])."""
    size = rcfg.size
    dist, tex_id, tex_u, hit_side = cast_rays(world, x, y, yaw, size, rcfg.fov_deg)

    focal = (size / 2.0) / math.tan(math.radians(rcfg.fov_deg) / 2.0)
    horizon = size / 2.0 - focal * math.tan(math.radians(tilt_deg))

    top = horizon - (1.0 - cam_height) * focal / dist      # wall z=1
    bottom = horizon + cam_height * focal / dist           # wall z=0

    rows = (np.arange(size, dtype=np.float32) + 0.5)[:, None]  # [S,1]
    rd_x, rd_y = ray_dirs(yaw, size, rcfg.fov_deg)
    img = np.zeros((size, size, 3), dtype=np.float32)

    # sky above the horizon where no wall covers it; a fixed sun azimuth per
    # sky id brightens columns facing it, so heading shows in the sky too
    zen, hor = SKY_PALETTES[sky_id % len(SKY_PALETTES)]
    sky_t = np.clip(rows / max(horizon, 1e-6), 0.0, 1.0)
    sky = (1.0 - sky_t) * np.array(zen, np.float32) + sky_t * np.array(hor, np.float32)
    sun_az = sky_id * 2.0 * math.pi / len(SKY_PALETTES)
    az = np.arctan2(rd_y, rd_x)
    boost = (1.0 + SUN_GAIN * np.cos(az - sun_az)).astype(np.float32)
    img[...] = sky[:, None, :] * boost[None, :, None]

    # floor below the horizon: ground-plane checker anchored to world cells,
    # shaded by the distance of the ground sample
    below = np.clip(rows - horizon, 1e-6, None)
    floor_dist = cam_height * focal / below                      # [S,1]
    gx = np.floor(x + floor_dist * rd_x[None, :])
    gy = np.floor(y + floor_dist * rd_y[None, :])
    check = ((gx + gy) % 2).astype(np.float32)                   # [S,S]
    floor_shade = (1.0 / (1.0 + 0.12 * floor_dist)) * (1.0 - FLOOR_CHECK * check)
    floor_px = FLOOR_COLOR * floor_shade[..., None]
    floor_mask = (rows > horizon)[:, :, None]
    img = np.where(floor_mask, floor_px, img)

    # wall band
    span = np.maximum(bottom - top, 1e-6)
    v = (rows - top[None, :]) / span[None, :]
    wall_mask = (v >= 0.0) & (v < 1.0)
    u2 = np.broadcast_to(tex_u[None, :], (size, size))
    tid2 = np.broadcast_to(tex_id[None, :], (size, size))
    texel = _texel(tid2, u2, np.clip(v, 0.0, 1.0))
    shade = 1.0 / (1.0 + 0.05 * dist)
    shade = np.where(hit_side == 1, shade * 0.85, shade)
    wall_px = texel * shade[None, :, None]
    img = np.where(wall_mask[..., None], wall_px, img)

    return np.clip(img, 0, 255).astype(np.uint8), dist
