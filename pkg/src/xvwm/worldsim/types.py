"""Core domain types for the multi-view arena simulator."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..errors import ConfigurationError, UsageError


class ViewId(IntEnum):
    """The four synchronized camera perspectives.

    Codes are stable and used in serialized episode files.
    """

    EGO = 0
    BEV = 1
    OVER_SHOULDER = 2
    FRONT = 3

    @property
    def short_name(self) -> str:
        return _SHORT_NAMES[self]

    @classmethod
    def from_name(cls, name: str) -> "ViewId":
        key = name.strip().lower().replace("-", "_")
        for view, short in _SHORT_NAMES.items():
            if key in (short, view.name.lower()):
                return view
        raise UsageError(f"unknown view name {name!r}; expected one of "
                         f"{sorted(_SHORT_NAMES.values())}")


_SHORT_NAMES = {
    ViewId.EGO: "ego",
    ViewId.BEV: "bev",
    ViewId.OVER_SHOULDER: "os",
    ViewId.FRONT: "front",
}

ALL_VIEWS = (ViewId.EGO, ViewId.BEV, ViewId.OVER_SHOULDER, ViewId.FRONT)


@dataclass(frozen=True)
class AgentState:
    """Continuous pose inside the arena: position in world units, yaw in
    radians normalized to [0, 2pi)."""

    x: float
    y: float
    yaw: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.yaw], dtype=np.float32)

    @classmethod
    def from_array(cls, a) -> "AgentState":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class Action:
    """Per-frame control: agent-local forward/strafe displacement in world
    units and yaw change in radians."""

    dx: float
    dy: float
    dphi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dphi], dtype=np.float32)

    @classmethod
    def from_array(cls, a) -> "Action":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    @classmethod
    def zero(cls) -> "Action":
        return cls(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Landmark:
    """A colored pillar occupying one grid cell; visible in every view."""

    x: float          # cell-center position, world units
    y: float
    color: tuple[int, int, int]
    shape: str        # "circle" | "square" | "diamond"


@dataclass(frozen=True, eq=False)
class World:
    """Immutable arena: square occupancy grid (1 cell = 1 world unit) with
    border walls, textured wall cells, landmark pillars, and a per-episode
    sky identifier.

    ``occupancy[iy, ix]`` covers the world square [ix, ix+1) x [iy, iy+1).
    ``wall_tex`` is 0 on free cells, a texture id on wall cells, and
    128 + landmark index on landmark cells.
    """

    map_id: str
    side: int                      # arena side, cells == world units
    occupancy: np.ndarray          # (side, side) bool
    wall_tex: np.ndarray           # (side, side) uint8
    landmarks: tuple[Landmark, ...]
    sky_id: int

    def with_sky(self, sky_id: int) -> "World":
        """Same arena under a different sky."""
        return World(self.map_id, self.side, self.occupancy, self.wall_tex,
                     self.landmarks, int(sky_id))


@dataclass(frozen=True)
class WorldConfig:
    side: int = 16                 # arena side in cells (>= 8)
    interior_walls: int = 3        # straight interior wall segments
    num_landmarks: int = 6
    wall_texture_count: int = 8    # distinct wall texture ids (>= 6)
    num_skies: int = 5
    max_step: float = 0.5          # |dx|, |dy| bound per frame, world units
    max_turn: float = 0.6          # |dphi| bound per frame, radians
    agent_radius: float = 0.25     # collision half-extent, world units

    def validate(self) -> None:
        if self.side < 8:
            raise ConfigurationError(
                f"arena side must be >= 8 cells, got {self.side}")
        if self.wall_texture_count < 6:
            raise ConfigurationError(
                f"need >= 6 wall texture ids, got {self.wall_texture_count}")
        if self.num_skies < 4:
            raise ConfigurationError(
                f"need >= 4 skies in the palette, got {self.num_skies}")
        if not (0 < self.agent_radius < 0.5):
            raise ConfigurationError(
                f"agent radius must be in (0, 0.5), got {self.agent_radius}")


@dataclass(frozen=True)
class RenderConfig:
    size: int = 64                 # square frame side, pixels
    fov_deg: float = 90.0          # horizontal field of view, ego-style views
    cam_height: float = 0.5        # ego camera height, fraction of wall height
    os_distance: float = 1.5      # over-shoulder camera offset behind agent
    os_height: float = 0.85
    os_tilt_deg: float = 10.0      # downward tilt
    front_distance: float = 2.0    # front camera offset ahead of agent
    front_height: float = 0.8
    front_tilt_deg: float = 20.0
    marker_len_ratio: float = 17.0 / 224.0   # BEV marker long axis / image side
    marker_width_ratio: float = 0.6          # base width / long axis
    supersample: int = 8                     # marker rasterization subgrid

    def validate(self) -> None:
        if self.size < 16 or self.size % 8 != 0:
            raise ConfigurationError(
                f"frame size must be a multiple of 8 and >= 16, got {self.size}")
        if not (10.0 <= self.fov_deg <= 170.0):
            raise ConfigurationError(f"fov out of range: {self.fov_deg}")

    @property
    def marker_len_px(self) -> float:
        return self.marker_len_ratio * self.size


def new_frame(size: int) -> np.ndarray:
    """Blank RGB frame, row-major uint8."""
    return np.zeros((size, size, 3), dtype=np.uint8)
