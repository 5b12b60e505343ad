"""Agent kinematics and collision resolution.

The agent is a square of half-extent ``agent_radius`` aligned to the world
axes. Movement into walls is resolved per axis: the blocked axis is clamped
to the wall face (minus a small margin so float32-quantized poses stay in
free space), the free axis keeps its full displacement.

Cells cover half-open squares [ix, ix+1) x [iy, iy+1); an agent edge that
exactly touches a cell face does not overlap it.
"""

from __future__ import annotations

import math

import numpy as np

from .types import Action, AgentState, World, WorldConfig

TWO_PI = 2.0 * math.pi
_CLAMP_MARGIN = 1e-4


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return math.pi - (math.pi - a) % TWO_PI


def norm_angle(a: float) -> float:
    """Normalize to [0, 2pi). The modulo of a tiny negative rounds up to
    exactly 2pi in floats, so that case folds back to 0."""
    v = a % TWO_PI
    return 0.0 if v >= TWO_PI else v


def _span(lo: float, hi: float) -> tuple[int, int]:
    """Cells overlapped by the half-open interval [lo, hi)."""
    return int(math.floor(lo)), int(math.ceil(hi)) - 1


def is_free(world: World, x: float, y: float, radius: float) -> bool:
    """True when the agent square at (x, y) overlaps no wall cell and stays
    inside the arena."""
    side = world.side
    if x - radius < 0 or y - radius < 0 or x + radius > side or y + radius > side:
        return False
    ix0, ix1 = _span(x - radius, x + radius)
    iy0, iy1 = _span(y - radius, y + radius)
    ix0, iy0 = max(ix0, 0), max(iy0, 0)
    ix1, iy1 = min(ix1, side - 1), min(iy1, side - 1)
    return not world.occupancy[iy0:iy1 + 1, ix0:ix1 + 1].any()


def _slide_axis(world: World, pos: float, delta: float, radius: float,
                perp_lo: int, perp_hi: int, axis: str) -> float:
    """Move one coordinate by ``delta``, stopping at the first wall face.

    ``perp_lo..perp_hi`` are the cell rows (x move) or columns (y move) the
    agent spans on the perpendicular axis.
    """
    if delta == 0.0:
        return pos
    occ = world.occupancy
    side = world.side

    def blocked(cell: int) -> bool:
        if not 0 <= cell < side:
            return True   # outside the grid counts as solid
        if axis == "x":
            return bool(occ[perp_lo:perp_hi + 1, cell].any())
        return bool(occ[cell, perp_lo:perp_hi + 1].any())

    target = pos + delta
    if delta > 0.0:
        edge = pos + radius
        first = int(math.floor(edge))
        last = int(math.ceil(target + radius)) - 1
        for cell in range(first, last + 1):
            if cell + 1e-12 >= edge and blocked(cell):
                limit = cell - radius - _CLAMP_MARGIN
                return max(pos, min(target, limit))
        return target
    else:
        edge = pos - radius
        first = int(math.ceil(edge)) - 1
        last = int(math.floor(target - radius))
        for cell in range(first, last - 1, -1):
            if cell + 1 <= edge + 1e-12 and blocked(cell):
                limit = cell + 1 + radius + _CLAMP_MARGIN
                return min(pos, max(target, limit))
        return target


def step(world: World, state: AgentState, action: Action,
         config: WorldConfig = WorldConfig()) -> AgentState:
    """Advance one frame: turn first, then translate the local displacement
    rotated into the world frame, sliding along walls axis by axis."""
    assert abs(action.dx) <= config.max_step + 1e-9, "dx exceeds max_step"
    assert abs(action.dy) <= config.max_step + 1e-9, "dy exceeds max_step"
    assert abs(action.dphi) <= config.max_turn + 1e-9, "dphi exceeds max_turn"
    assert is_free(world, state.x, state.y, config.agent_radius), \
        "state starts inside a wall"

    yaw2 = norm_angle(state.yaw + action.dphi)
    c, s = math.cos(yaw2), math.sin(yaw2)
    wx = action.dx * c - action.dy * s
    wy = action.dx * s + action.dy * c

    r = config.agent_radius
    iy0, iy1 = _span(state.y - r, state.y + r)
    new_x = _slide_axis(world, state.x, wx, r, iy0, iy1, axis="x")

    ix0, ix1 = _span(new_x - r, new_x + r)
    new_y = _slide_axis(world, state.y, wy, r, ix0, ix1, axis="y")

    return AgentState(new_x, new_y, yaw2)


def kinematic_step(state: AgentState, action: Action) -> AgentState:
    """Collision-free pose composition; used for hypothetical rollouts."""
    yaw2 = norm_angle(state.yaw + action.dphi)
    c, s = math.cos(yaw2), math.sin(yaw2)
    return AgentState(state.x + action.dx * c - action.dy * s,
                      state.y + action.dx * s + action.dy * c,
                      yaw2)


def random_free_pose(world: World, rng: np.random.Generator,
                     config: WorldConfig = WorldConfig()) -> AgentState:
    """Uniform pose over free space with full wall clearance."""
    r = config.agent_radius
    for _ in range(10_000):
        x = float(rng.uniform(1.0 + r, world.side - 1.0 - r))
        y = float(rng.uniform(1.0 + r, world.side - 1.0 - r))
        if is_free(world, x, y, r + _CLAMP_MARGIN):
            return AgentState(x, y, float(rng.uniform(0.0, TWO_PI)))
    raise RuntimeError("could not sample a free pose")
