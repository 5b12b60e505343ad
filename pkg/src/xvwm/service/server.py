"""Websocket front end: one connection, one session, one world.

Messages on a connection are answered strictly in arrival order. All
sessions share the same read-only model; running inference on the event
loop serializes it, which is the point on a single-core box.
"""

from __future__ import annotations

import asyncio
import json

import numpy as np
from websockets.asyncio.server import serve

from ..model import checkpoint_hash, restore_model
from .session import SessionCore


class Service:
    def __init__(self, model, schedule, checkpoint_id, world_cfg, render_cfg,
                 seed: int = 0, fps: float = 5.0, live_steps: int = 10,
                 whatif_steps: int = 20):
        self.model = model
        self.schedule = schedule
        self.checkpoint_id = checkpoint_id
        self.world_cfg = world_cfg
        self.render_cfg = render_cfg
        self.seed = seed
        self.fps = fps
        self.live_steps = live_steps
        self.whatif_steps = whatif_steps
        self._count = 0

    def open_session(self) -> SessionCore:
        self._count += 1
        n = self._count
        seed = int(np.random.SeedSequence(
            [self.seed, n]).generate_state(1)[0])
        return SessionCore(f"s{n:04d}", self.model, self.schedule,
                           self.world_cfg, self.render_cfg,
                           self.checkpoint_id, seed=seed, fps=self.fps,
                           live_steps=self.live_steps,
                           whatif_steps=self.whatif_steps)

    async def handler(self, ws) -> None:
        session = self.open_session()
        await ws.send(json.dumps(session.hello()))
        async for raw in ws:
            try:
                msg = json.loads(raw)
            except (json.JSONDecodeError, UnicodeDecodeError) as e:
                replies = [{"type": "error", "tick": session.tick,
                            "error": f"message is not valid JSON: {e}",
                            "field": "json"}]
            else:
                replies = session.handle(msg)
            for reply in replies:
                await ws.send(json.dumps(reply))


async def _serve(service: Service, host: str, port: int) -> None:
    async with serve(service.handler, host, port) as server:
        actual = server.sockets[0].getsockname()[1] if server.sockets else port
        print(f"imagination service on ws://{host}:{actual} "
              f"(checkpoint {service.checkpoint_id})", flush=True)
        await asyncio.get_running_loop().create_future()


def run_server(checkpoint, world, render, serve_cfg, seed: int = 0,
               fps: float = 5.0) -> int:
    """Load a checkpoint and serve it until interrupted."""
    model, schedule, _ = restore_model(checkpoint)
    service = Service(model, schedule, checkpoint_hash(checkpoint),
                      world, render, seed=seed, fps=fps,
                      live_steps=serve_cfg.live_ddim_steps,
                      whatif_steps=serve_cfg.whatif_ddim_steps)
    asyncio.run(_serve(service, serve_cfg.host, serve_cfg.port))
    return 0
