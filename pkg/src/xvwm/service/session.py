"""Session state machine, free of any socket dependency.

A session owns one world, one agent pose and a ring buffer of the last
n_ctx ground-truth frames per view. Actions advance the real environment;
``whatif`` composes hypothetical poses kinematically and never touches it.
Model weights are shared between sessions read-only.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..data import cum_action
from ..errors import ConfigurationError
from ..model import ddim_sample
from ..worldsim import (Action, AgentState, ViewId, is_free, kinematic_step,
                        make_world, random_free_pose, render, step)
from .protocol import (ENCODING, Malformed, PROTOCOL_VERSION, encode_frame,
                       need, need_int, need_number)

SERVICE_SALT = 0x53455256

# whatif is a preview, not an unbounded rollout; predictions this far out
# are extrapolation anyway
MAX_WHATIF_HORIZON = 100


class SessionCore:
    def __init__(self, session_id: str, model, schedule, world_cfg,
                 render_cfg, checkpoint_id: str, seed: int = 0,
                 fps: float = 5.0, live_steps: int = 10,
                 whatif_steps: int = 20):
        if render_cfg.size != model.cfg.image_size:
            raise ConfigurationError(
                f"model renders {model.cfg.image_size}px, render config "
                f"says {render_cfg.size}px")
        self.id = session_id
        self.model = model
        self.schedule = schedule
        self.world_cfg = world_cfg
        self.render_cfg = render_cfg
        self.checkpoint_id = checkpoint_id
        self.fps = fps
        self.live_steps = live_steps
        self.whatif_steps = whatif_steps
        self.n_ctx = model.cfg.context_len
        self.steer_view = model.cfg.views[0]
        self.imagined: tuple[ViewId, ...] = ()
        self._reset(seed, None)

    # -- lifecycle -----------------------------------------------------------

    def _reset(self, seed: int, pose: AgentState | None) -> None:
        # build everything first, commit at the end: a rejected pose must
        # leave the running session exactly as it was
        rng = np.random.default_rng(
            np.random.SeedSequence([SERVICE_SALT, seed]))
        world = make_world(seed, self.world_cfg)
        if pose is None:
            pose = random_free_pose(world, rng, self.world_cfg)
        elif not is_free(world, pose.x, pose.y, self.world_cfg.agent_radius):
            raise Malformed("pose", f"pose ({pose.x}, {pose.y}) is inside "
                                    "a wall or outside the arena")
        # a fresh session has no history yet; a stationary one is the only
        # context that tells the model nothing false
        buffers = {}
        for v in self.model.cfg.views:
            frame = render(world, pose, v, self.render_cfg)
            buffers[v] = deque([frame] * self.n_ctx, maxlen=self.n_ctx)
        self.rng = rng
        self.world = world
        self.state = pose
        self.tick = 0
        self.buffers = buffers

    def hello(self) -> dict:
        return {"type": "hello", "tick": self.tick,
                "version": PROTOCOL_VERSION, "session": self.id,
                "checkpoint": self.checkpoint_id,
                "image_size": self.model.cfg.image_size, "fps": self.fps,
                "world_side": self.world.side,
                "views": [v.short_name for v in self.model.cfg.views],
                "steer_view": self.steer_view.short_name,
                "imagined_views": [v.short_name for v in self.imagined]}

    # -- dispatch ------------------------------------------------------------

    def handle(self, msg) -> list[dict]:
        """Process one client message; errors never kill the session."""
        try:
            if not isinstance(msg, dict):
                raise Malformed("message", "message must be a JSON object")
            kind = need(msg, "type", str, "a message type")
            if kind == "configure":
                return self._configure(msg)
            if kind == "action":
                return self._action(msg)
            if kind == "whatif":
                return self._whatif(msg)
            if kind == "reset":
                return self._do_reset(msg)
            raise Malformed("type", f"unknown message type {kind!r}")
        except Malformed as e:
            return [{"type": "error", "tick": self.tick, "error": str(e),
                     "field": e.field}]

    # -- message handlers ------------------------------------------------------

    def _view(self, msg: dict, field: str) -> ViewId:
        name = need(msg, field, str, "a view name")
        try:
            view = ViewId.from_name(name)
        except Exception:
            raise Malformed(field, f"unknown view {name!r}") from None
        if view not in self.model.cfg.views:
            raise Malformed(
                field, f"view {view.short_name!r} is outside this model's "
                f"training set {[v.short_name for v in self.model.cfg.views]}")
        return view

    def _configure(self, msg: dict) -> list[dict]:
        # validate the whole message before touching any state; a rejected
        # configure must change nothing
        steer = self.steer_view
        imagined = self.imagined
        if "checkpoint" in msg:
            want = need(msg, "checkpoint", str, "a checkpoint id")
            if want != self.checkpoint_id:
                raise Malformed(
                    "checkpoint", f"only checkpoint {self.checkpoint_id!r} "
                    "is loaded on this server")
        if "steer_view" in msg:
            steer = self._view(msg, "steer_view")
        if "imagined_views" in msg:
            names = need(msg, "imagined_views", list, "a list of view names")
            views = []
            for i, name in enumerate(names):
                field = f"imagined_views[{i}]"
                view = self._view({field: name}, field)
                if view not in views:
                    views.append(view)
            imagined = tuple(views)
        self.steer_view = steer
        self.imagined = imagined
        return [{"type": "configure", "tick": self.tick,
                 "steer_view": self.steer_view.short_name,
                 "imagined_views": [v.short_name for v in self.imagined],
                 "checkpoint": self.checkpoint_id}]

    def _action(self, msg: dict) -> list[dict]:
        act = Action(need_number(msg, "dx", self.world_cfg.max_step),
                     need_number(msg, "dy", self.world_cfg.max_step),
                     need_number(msg, "dphi", self.world_cfg.max_turn))
        context = np.stack(self.buffers[self.steer_view])

        old = self.state
        self.state = step(self.world, old, act, self.world_cfg)
        self.tick += 1

        # the realized move, not the requested one: walls clip actions
        poses = np.stack([old.as_array(), self.state.as_array()])
        cum = cum_action(poses, 0, 1)

        frames = {v: render(self.world, self.state, v, self.render_cfg)
                  for v in self.model.cfg.views}
        out = [self._frame_msg(self.steer_view, frames[self.steer_view],
                               "truth")]
        for view in self.imagined:
            pred = self._predict(context, cum[None],
                                 np.float32([1.0 / self.fps]), view,
                                 self.live_steps)
            out.append(self._frame_msg(view, pred[0], "imagined"))
        for view, frame in frames.items():
            self.buffers[view].append(frame)
        return out

    def _whatif(self, msg: dict) -> list[dict]:
        view = self._view(msg, "view")
        raw = need(msg, "actions", list, "a list of actions")
        horizon = need_int(msg, "horizon") if "horizon" in msg \
            else max(1, len(raw))
        if not 1 <= horizon <= MAX_WHATIF_HORIZON:
            raise Malformed("horizon",
                            f"horizon must be in [1, {MAX_WHATIF_HORIZON}]")
        if len(raw) > horizon:
            raise Malformed("actions",
                            f"{len(raw)} actions exceed horizon {horizon}")
        acts = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, dict):
                raise Malformed(f"actions[{i}]", "action must be an object")
            try:
                acts.append(Action(
                    need_number(entry, "dx", self.world_cfg.max_step),
                    need_number(entry, "dy", self.world_cfg.max_step),
                    need_number(entry, "dphi", self.world_cfg.max_turn)))
            except Malformed as e:
                raise Malformed(f"actions[{i}].{e.field}", str(e)) from None
        acts += [Action(0.0, 0.0, 0.0)] * (horizon - len(acts))

        # hypothetical poses compose kinematically; the live state, world
        # and ring buffers stay untouched
        poses = [self.state.as_array()]
        pose = self.state
        for act in acts:
            pose = kinematic_step(pose, act)
            poses.append(pose.as_array())
        poses = np.stack(poses)

        context = np.stack(self.buffers[self.steer_view])
        cum = np.stack([cum_action(poses, 0, j) for j in range(1, horizon + 1)])
        rel = np.arange(1, horizon + 1, dtype=np.float32) / self.fps
        preds = self._predict(context, cum, rel, view, self.whatif_steps)
        return [dict(self._frame_msg(view, preds[j - 1], "whatif"), k=j)
                for j in range(1, horizon + 1)]

    def _do_reset(self, msg: dict) -> list[dict]:
        seed = need_int(msg, "seed")
        pose = None
        if "pose" in msg:
            spec = need(msg, "pose", list, "a [x, y, yaw] triple")
            if len(spec) != 3 or not all(
                    isinstance(c, (int, float)) and not isinstance(c, bool)
                    for c in spec):
                raise Malformed("pose", "pose must be [x, y, yaw] numbers")
            pose = AgentState(float(spec[0]), float(spec[1]),
                              float(spec[2]) % (2.0 * np.pi))
        self._reset(seed, pose)
        ack = {"type": "reset", "tick": self.tick,
               "pose": [round(self.state.x, 6), round(self.state.y, 6),
                        round(self.state.yaw, 6)]}
        truth = self._frame_msg(
            self.steer_view, self.buffers[self.steer_view][-1], "truth")
        return [ack, truth]

    # -- shared pieces -----------------------------------------------------------

    def _predict(self, context: np.ndarray, cum: np.ndarray,
                 rel: np.ndarray, view: ViewId, steps: int) -> np.ndarray:
        b = cum.shape[0]
        ctx = np.broadcast_to(context, (b,) + context.shape)
        rows = np.full(b, self.model.cfg.view_row(view))
        return ddim_sample(self.model, self.schedule, ctx, rel, cum, rows,
                           self.rng, steps=steps)

    def _frame_msg(self, view: ViewId, frame: np.ndarray,
                   source: str) -> dict:
        msg = {"type": "frame", "tick": self.tick, "view": view.short_name,
               "source": source, "encoding": ENCODING,
               "payload": encode_frame(frame)}
        if source == "truth":
            msg["pose"] = [round(self.state.x, 6), round(self.state.y, 6),
                           round(self.state.yaw, 6)]
        return msg
