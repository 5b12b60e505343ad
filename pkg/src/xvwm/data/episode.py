"""Episode rollout: a wandering agent recorded from several cameras.

Poses are stored as float32 and every step starts from the stored float32
pose, so a reader can replay the trajectory bit-exactly: for all t,
poses[t+1] == float32(step(world, poses[t], actions[t])).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..worldsim import (Action, AgentState, RenderConfig, ViewId, World,
                        WorldConfig, make_world, random_free_pose, render,
                        step)

EPISODE_SALT = 0x45504953


@dataclass(frozen=True)
class EpisodeConfig:
    length: int = 100                  # frames; 20 s at the default rate
    fps: float = 5.0
    views: tuple[ViewId, ...] = (ViewId.EGO, ViewId.BEV)
    world: WorldConfig = field(default_factory=WorldConfig)
    render: RenderConfig = field(default_factory=RenderConfig)

    def validate(self) -> None:
        if self.length < 2:
            raise ValueError("episode needs at least 2 frames")
        if not self.views or len(set(self.views)) != len(self.views):
            raise ValueError("views must be non-empty and unique")
        self.world.validate()
        self.render.validate()


@dataclass
class Episode:
    episode_id: int
    world_seed: int
    sky_id: int
    fps: float
    views: tuple[ViewId, ...]
    actions: np.ndarray                # f32 [T,3]; row t leads pose t -> t+1,
    poses: np.ndarray                  # last row is zero padding. f32 [T,3]
    frames: dict[ViewId, np.ndarray]   # each u8 [T,S,S,3]

    @property
    def length(self) -> int:
        return int(self.poses.shape[0])

    @property
    def size(self) -> int:
        return int(next(iter(self.frames.values())).shape[1])


def _f32_limit(x: float) -> np.float32:
    """Largest float32 magnitude that does not exceed x in float64."""
    b = np.float32(x)
    return np.nextafter(b, np.float32(0.0)) if float(b) > x else b


def _policy_actions(rng: np.random.Generator, length: int,
                    wcfg: WorldConfig) -> np.ndarray:
    """Smoothed wander: heading momentum, mostly-forward speed, rare strafes."""
    acts = np.zeros((length, 3), dtype=np.float32)
    dphi = 0.0
    strafe_left = 0
    strafe_v = 0.0
    for t in range(length - 1):
        dphi = 0.82 * dphi + 0.18 * rng.normal(0.0, 0.45)
        if rng.random() < 0.02:        # occasional sharp turn impulse
            dphi += rng.choice((-1.0, 1.0)) * rng.uniform(0.3, 0.6)
        dx = abs(rng.normal(0.30, 0.10))
        if rng.random() < 0.05:        # brief pause or reverse
            dx = rng.uniform(-0.15, 0.05)
        if strafe_left == 0 and rng.random() < 0.04:
            strafe_left = int(rng.integers(3, 8))
            strafe_v = rng.choice((-1.0, 1.0)) * rng.uniform(0.08, 0.22)
        dy = strafe_v if strafe_left > 0 else 0.0
        strafe_left = max(0, strafe_left - 1)
        acts[t, 0] = dx
        acts[t, 1] = dy
        acts[t, 2] = dphi
    # clamp after float32 quantization: a value just under a limit that is
    # not float32-representable (0.6 rounds up to 0.60000002) would
    # otherwise land past it in the stored file
    lim = np.array([_f32_limit(wcfg.max_step), _f32_limit(wcfg.max_step),
                    _f32_limit(wcfg.max_turn)], dtype=np.float32)
    np.clip(acts, -lim, lim, out=acts)
    return acts


def generate_episode(episode_id: int, world_seed: int,
                     config: EpisodeConfig = EpisodeConfig()) -> Episode:
    """Roll one episode deterministically from (episode_id, world_seed)."""
    config.validate()
    world = make_world(world_seed, config.world)
    rng = np.random.default_rng(
        np.random.SeedSequence([EPISODE_SALT, world_seed, episode_id]))

    length = config.length
    actions = _policy_actions(rng, length, config.world)
    poses = np.zeros((length, 3), dtype=np.float32)

    state = random_free_pose(world, rng, config.world)
    poses[0] = np.float32([state.x, state.y, state.yaw])
    for t in range(length - 1):
        cur = AgentState(*poses[t].astype(np.float64).tolist())
        act = Action(*actions[t].astype(np.float64).tolist())
        nxt = step(world, cur, act, config.world)
        poses[t + 1] = np.float32([nxt.x, nxt.y, nxt.yaw])

    frames: dict[ViewId, np.ndarray] = {}
    size = config.render.size
    for view in config.views:
        buf = np.empty((length, size, size, 3), dtype=np.uint8)
        for t in range(length):
            st = AgentState(*poses[t].astype(np.float64).tolist())
            buf[t] = render(world, st, view, config.render)
        frames[view] = buf

    return Episode(episode_id=episode_id, world_seed=world_seed,
                   sky_id=world.sky_id, fps=config.fps, views=config.views,
                   actions=actions, poses=poses, frames=frames)


def replay_poses(world: World, poses: np.ndarray, actions: np.ndarray,
                 wcfg: WorldConfig = WorldConfig()) -> bool:
    """Check the stored trajectory is reproduced bit-exactly by the stepper."""
    for t in range(poses.shape[0] - 1):
        cur = AgentState(*poses[t].astype(np.float64).tolist())
        act = Action(*actions[t].astype(np.float64).tolist())
        nxt = step(world, cur, act, wcfg)
        if not np.array_equal(np.float32([nxt.x, nxt.y, nxt.yaw]), poses[t + 1]):
            return False
    return True
