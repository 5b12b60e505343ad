"""Procedural arena worlds, agent kinematics and the four camera views."""

from .bev import project_to_bev, render_bev, stamp_marker, static_map
from .motion import (is_free, kinematic_step, norm_angle, random_free_pose,
                     step, wrap_angle)
from .raycast import SKY_PALETTES, render_first_person
from .render import render, render_views
from .types import (ALL_VIEWS, Action, AgentState, Landmark, RenderConfig,
                    ViewId, World, WorldConfig)
from .world import free_cells, make_world

__all__ = [
    "ALL_VIEWS", "Action", "AgentState", "Landmark", "RenderConfig",
    "SKY_PALETTES", "ViewId", "World", "WorldConfig", "free_cells",
    "is_free", "kinematic_step", "make_world", "norm_angle",
    "project_to_bev", "random_free_pose", "render", "render_bev",
    "render_first_person", "render_views", "stamp_marker", "static_map",
    "step", "wrap_angle",
]
