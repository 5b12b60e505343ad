"""Procedural arena construction.

One seed deterministically fixes the wall layout, wall textures, landmark
placement, and the default sky. Episodes re-draw only the sky.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from .types import Landmark, World, WorldConfig

# Landmark palette: bright, saturated, and never red-dominant so the BEV
# marker threshold (R>=200, G<=80, B<=80) cannot fire on a landmark even
# when antialiasing blends it with the marker edge.
LANDMARK_COLORS = (
    (60, 90, 235),    # blue
    (40, 200, 220),   # cyan
    (235, 210, 60),   # yellow
    (70, 200, 85),    # green
    (200, 80, 210),   # magenta
    (240, 150, 50),   # orange
)

LANDMARK_SHAPES = ("circle", "square", "diamond")

# Wall texture base colors, ids 1..8. Muted but mutually distinct; all keep
# max(G, B) >= 90 for the same marker-threshold safety reason.
WALL_COLORS = {
    1: (172, 122, 92),    # brick
    2: (104, 112, 132),   # slate
    3: (152, 152, 108),   # olive
    4: (92, 132, 122),    # teal
    5: (142, 102, 142),   # plum
    6: (122, 142, 92),    # moss
    7: (162, 142, 120),   # sand
    8: (112, 122, 162),   # periwinkle
}

LANDMARK_TEX_BASE = 128   # wall_tex code for landmark i is LANDMARK_TEX_BASE + i


def _border_ring(side: int) -> list[tuple[int, int]]:
    """Border cells in clockwise walk order starting at (0, 0)."""
    top = [(0, ix) for ix in range(side)]
    right = [(iy, side - 1) for iy in range(1, side)]
    bottom = [(side - 1, ix) for ix in range(side - 2, -1, -1)]
    left = [(iy, 0) for iy in range(side - 2, 0, -1)]
    return top + right + bottom + left


def _assign_run_textures(n_cells: int, n_tex: int, rng: np.random.Generator) -> np.ndarray:
    """Texture ids along a wall walk, in runs of 2-4 cells.

    The first pass cycles a shuffled permutation of the full palette, which
    guarantees every id appears and adjacent runs always differ.
    """
    ids = np.zeros(n_cells, dtype=np.uint8)
    perm = rng.permutation(np.arange(1, n_tex + 1))
    pos = 0
    run_idx = 0
    prev = 0
    while pos < n_cells:
        run_len = int(rng.integers(2, 5))
        if run_idx < n_tex:
            tex = int(perm[run_idx])
        else:
            tex = int(rng.integers(1, n_tex + 1))
            while tex == prev:
                tex = int(rng.integers(1, n_tex + 1))
        ids[pos:pos + run_len] = tex
        prev = tex
        pos += run_len
        run_idx += 1
    # Close the ring: if the final run matches the first, recolor its tail.
    if n_cells > 4 and ids[-1] == ids[0]:
        tex = int(rng.integers(1, n_tex + 1))
        while tex == ids[0] or tex == prev:
            tex = int(rng.integers(1, n_tex + 1))
        ids[-1] = tex
    return ids


def _connected(occupancy: np.ndarray) -> bool:
    """All free cells mutually reachable (4-neighborhood flood fill)."""
    free = ~occupancy
    total = int(free.sum())
    if total == 0:
        return False
    start = tuple(np.argwhere(free)[0])
    seen = np.zeros_like(free)
    stack = [start]
    seen[start] = True
    count = 0
    while stack:
        iy, ix = stack.pop()
        count += 1
        for ny, nx in ((iy - 1, ix), (iy + 1, ix), (iy, ix - 1), (iy, ix + 1)):
            if 0 <= ny < free.shape[0] and 0 <= nx < free.shape[1] \
                    and free[ny, nx] and not seen[ny, nx]:
                seen[ny, nx] = True
                stack.append((ny, nx))
    return count == total


def _place_interior_walls(occ: np.ndarray, tex: np.ndarray, n_walls: int,
                          n_tex: int, rng: np.random.Generator) -> None:
    side = occ.shape[0]
    placed = 0
    attempts = 0
    while placed < n_walls and attempts < 50 * n_walls:
        attempts += 1
        horizontal = bool(rng.integers(0, 2))
        length = int(rng.integers(3, max(4, side // 2)))
        iy = int(rng.integers(2, side - 2))
        ix = int(rng.integers(2, side - 2))
        if horizontal:
            cells = [(iy, ix + k) for k in range(length) if ix + k < side - 2]
        else:
            cells = [(iy + k, ix) for k in range(length) if iy + k < side - 2]
        if len(cells) < 3:
            continue
        trial = occ.copy()
        for c in cells:
            trial[c] = True
        if not _connected(trial):
            continue
        occ[:] = trial
        run_ids = _assign_run_textures(len(cells), n_tex, rng)
        for c, t in zip(cells, run_ids):
            tex[c] = t
        placed += 1


def _place_landmarks(occ: np.ndarray, tex: np.ndarray, n_marks: int,
                     rng: np.random.Generator) -> tuple[Landmark, ...]:
    side = occ.shape[0]
    landmarks: list[Landmark] = []
    attempts = 0
    while len(landmarks) < n_marks and attempts < 200:
        attempts += 1
        iy = int(rng.integers(2, side - 2))
        ix = int(rng.integers(2, side - 2))
        if occ[iy, ix]:
            continue
        if any(abs(lm.x - (ix + 0.5)) + abs(lm.y - (iy + 0.5)) < 3.0
               for lm in landmarks):
            continue
        trial = occ.copy()
        trial[iy, ix] = True
        if not _connected(trial):
            continue
        occ[iy, ix] = True
        idx = len(landmarks)
        tex[iy, ix] = LANDMARK_TEX_BASE + idx
        landmarks.append(Landmark(
            x=ix + 0.5, y=iy + 0.5,
            color=LANDMARK_COLORS[idx % len(LANDMARK_COLORS)],
            shape=LANDMARK_SHAPES[idx % len(LANDMARK_SHAPES)],
        ))
    return tuple(landmarks)


def make_world(seed: int, config: WorldConfig = WorldConfig()) -> World:
    """Build the arena deterministically from ``seed``."""
    config.validate()
    rng = np.random.default_rng(np.random.SeedSequence([0x57524C44, int(seed)]))
    side = config.side

    occ = np.zeros((side, side), dtype=bool)
    tex = np.zeros((side, side), dtype=np.uint8)
    occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True

    ring = _border_ring(side)
    ring_tex = _assign_run_textures(len(ring), config.wall_texture_count, rng)
    for (iy, ix), t in zip(ring, ring_tex):
        tex[iy, ix] = t

    _place_interior_walls(occ, tex, config.interior_walls,
                          config.wall_texture_count, rng)
    landmarks = _place_landmarks(occ, tex, config.num_landmarks, rng)

    sky_id = int(rng.integers(0, config.num_skies))

    world = World(
        map_id=f"arena-{seed}",
        side=side,
        occupancy=occ,
        wall_tex=tex,
        landmarks=landmarks,
        sky_id=sky_id,
    )
    _check_invariants(world, config)
    occ.setflags(write=False)
    tex.setflags(write=False)
    return world


def _check_invariants(world: World, config: WorldConfig) -> None:
    occ = world.occupancy
    if not (occ[0, :].all() and occ[-1, :].all()
            and occ[:, 0].all() and occ[:, -1].all()):
        raise ConfigurationError("arena border is not fully walled")
    wall_ids = world.wall_tex[(world.wall_tex > 0) & (world.wall_tex < LANDMARK_TEX_BASE)]
    if len(np.unique(wall_ids)) < 6:
        raise ConfigurationError(
            f"only {len(np.unique(wall_ids))} wall texture ids in use, need >= 6")
    if not _connected(occ):
        raise ConfigurationError("free space is not connected")


def free_cells(world: World) -> np.ndarray:
    """(n, 2) array of free-cell (ix, iy) indices."""
    ys, xs = np.where(~world.occupancy)
    return np.stack([xs, ys], axis=1)
