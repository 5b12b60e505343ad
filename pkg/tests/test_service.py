"""Session protocol and websocket server behavior."""

import asyncio
import importlib.util
import json
from pathlib import Path

import numpy as np
import pytest

from xvwm.errors import ProtocolError
from xvwm.evals import detect_marker
from xvwm.model import Denoiser, NoiseSchedule
from xvwm.model.config import ModelConfig
from xvwm.service import (Malformed, PROTOCOL_VERSION, Service, SessionCore,
                          decode_frame, encode_frame)
from xvwm.service.protocol import need, need_int, need_number
from xvwm.worldsim import (RenderConfig, ViewId, WorldConfig, is_free,
                           project_to_bev, render)

GOLDEN = Path(__file__).parent / "golden"


def _tiny_model(size=16):
    cfg = ModelConfig(image_size=size, patch=8, dim=16, heads=2, layers=1,
                      context_len=2, freq_dim=16,
                      views=(ViewId.EGO, ViewId.BEV))
    model = Denoiser(cfg, np.random.default_rng(0))
    schedule = NoiseSchedule(cfg.t_diff, cfg.beta_start, cfg.beta_end)
    return model, schedule


def _session(size=16, seed=5, **kw):
    model, schedule = _tiny_model(size)
    return SessionCore("s0001", model, schedule, WorldConfig(),
                       RenderConfig(size=size), "deadbeef0000", seed=seed,
                       fps=5.0, live_steps=2, whatif_steps=2, **kw)


def _one(session, msg):
    out = session.handle(msg)
    assert len(out) == 1, out
    return out[0]


class TestProtocolHelpers:
    def test_need_missing_and_type(self):
        with pytest.raises(Malformed) as e:
            need({}, "dx", (int, float), "a number")
        assert e.value.field == "dx"
        with pytest.raises(Malformed):
            need({"dx": "x"}, "dx", (int, float), "a number")

    def test_bool_is_not_a_number(self):
        # JSON true would otherwise pass an isinstance((int, float)) check
        with pytest.raises(Malformed):
            need_number({"dx": True}, "dx")
        with pytest.raises(Malformed):
            need_int({"seed": True}, "seed")

    def test_need_number_rejects_nan_and_bounds(self):
        with pytest.raises(Malformed):
            need_number({"dx": float("nan")}, "dx")
        assert need_number({"dx": 0.5}, "dx", limit=0.5) == 0.5
        with pytest.raises(Malformed):
            need_number({"dx": 0.51}, "dx", limit=0.5)

    def test_frame_codec_roundtrip(self):
        rng = np.random.default_rng(0)
        frame = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
        assert np.array_equal(decode_frame(encode_frame(frame)), frame)

    def test_frame_codec_rejects_junk(self):
        with pytest.raises(ProtocolError):
            encode_frame(np.zeros((4, 4, 3), dtype=np.float32))
        with pytest.raises(ProtocolError):
            decode_frame("not base64!!")
        with pytest.raises(ProtocolError):
            decode_frame("aGVsbG8=")  # valid base64, not a png


class TestSession:
    def test_hello(self):
        s = _session()
        h = s.hello()
        assert h["type"] == "hello" and h["tick"] == 0
        assert h["version"] == PROTOCOL_VERSION
        assert h["checkpoint"] == "deadbeef0000"
        assert h["views"] == ["ego", "bev"]
        assert h["steer_view"] == "ego" and h["imagined_views"] == []
        assert h["image_size"] == 16 and h["fps"] == 5.0
        assert h["world_side"] == 16

    def test_configure_ack_and_dedupe(self):
        s = _session()
        ack = _one(s, {"type": "configure", "steer_view": "bev",
                       "imagined_views": ["ego", "ego"]})
        assert ack["type"] == "configure"
        assert ack["steer_view"] == "bev"
        assert ack["imagined_views"] == ["ego"]
        assert s.steer_view is ViewId.BEV
        assert s.imagined == (ViewId.EGO,)

    def test_configure_is_atomic(self):
        # a bad imagined list must not apply the good steer_view next to it
        s = _session()
        err = _one(s, {"type": "configure", "steer_view": "bev",
                       "imagined_views": ["ego", "zenith"]})
        assert err["type"] == "error"
        assert err["field"] == "imagined_views[1]"
        assert s.steer_view is ViewId.EGO and s.imagined == ()

    def test_configure_view_outside_model(self):
        # 'os' is a real view name, just not one this model was trained on
        s = _session()
        err = _one(s, {"type": "configure", "steer_view": "os"})
        assert err["type"] == "error" and err["field"] == "steer_view"
        assert "ego" in err["error"] and "bev" in err["error"]

    def test_configure_checkpoint_must_match(self):
        s = _session()
        err = _one(s, {"type": "configure", "checkpoint": "cafecafecafe"})
        assert err["type"] == "error" and err["field"] == "checkpoint"
        ack = _one(s, {"type": "configure", "checkpoint": "deadbeef0000"})
        assert ack["type"] == "configure"

    def test_zero_action_keeps_pose(self):
        s = _session()
        before = s.state
        frame = _one(s, {"type": "action", "dx": 0.0, "dy": 0.0, "dphi": 0.0})
        assert frame["type"] == "frame" and frame["tick"] == 1
        assert frame["source"] == "truth" and frame["view"] == "ego"
        assert s.state == before
        expected = render(s.world, s.state, ViewId.EGO, s.render_cfg)
        assert np.array_equal(decode_frame(frame["payload"]), expected)

    def test_action_emits_truth_then_imagined(self):
        s = _session()
        s.handle({"type": "configure", "steer_view": "bev",
                  "imagined_views": ["ego"]})
        out = s.handle({"type": "action", "dx": 0.1, "dy": 0.0, "dphi": 0.2})
        assert [(m["view"], m["source"]) for m in out] == [
            ("bev", "truth"), ("ego", "imagined")]
        assert all(m["tick"] == 1 for m in out)
        assert "pose" in out[0] and "pose" not in out[1]
        assert decode_frame(out[1]["payload"]).shape == (16, 16, 3)

    def test_action_bounds_and_missing_fields(self):
        s = _session()
        cfg = WorldConfig()
        err = _one(s, {"type": "action", "dx": cfg.max_step * 2,
                       "dy": 0.0, "dphi": 0.0})
        assert err["type"] == "error" and err["field"] == "dx"
        err = _one(s, {"type": "action", "dx": 0.0, "dphi": 0.0})
        assert err["field"] == "dy"
        err = _one(s, {"type": "action", "dx": 0.0, "dy": 0.0,
                       "dphi": cfg.max_turn * 2})
        assert err["field"] == "dphi"
        # the session survives all of it
        assert s.tick == 0
        out = _one(s, {"type": "action", "dx": 0.0, "dy": 0.0, "dphi": 0.0})
        assert out["type"] == "frame" and s.tick == 1

    def test_whatif_is_pure(self):
        s = _session()
        s.handle({"type": "action", "dx": 0.1, "dy": 0.0, "dphi": 0.1})
        pose = s.state
        buffers = {v: [f.copy() for f in buf] for v, buf in s.buffers.items()}
        out = s.handle({"type": "whatif", "view": "bev",
                        "actions": [{"dx": 0.2, "dy": 0.0, "dphi": 0.0}],
                        "horizon": 3})
        assert [m["k"] for m in out] == [1, 2, 3]
        assert all(m["source"] == "whatif" and m["tick"] == 1 for m in out)
        assert s.state == pose and s.tick == 1
        for v, buf in s.buffers.items():
            assert all(np.array_equal(a, b)
                       for a, b in zip(buf, buffers[v]))

    def test_whatif_defaults_to_one_step(self):
        s = _session()
        out = s.handle({"type": "whatif", "view": "ego", "actions": []})
        assert len(out) == 1 and out[0]["k"] == 1 and out[0]["tick"] == 0

    def test_whatif_validation(self):
        s = _session()
        base = {"type": "whatif", "view": "ego"}
        err = _one(s, dict(base, actions=[], horizon=0))
        assert err["field"] == "horizon"
        err = _one(s, dict(base, actions=[], horizon=101))
        assert err["field"] == "horizon"
        err = _one(s, dict(base, actions=[{"dx": 0, "dy": 0, "dphi": 0}] * 2,
                           horizon=1))
        assert err["field"] == "actions"
        err = _one(s, dict(base, actions=[{"dx": 0, "dy": 0, "dphi": 0},
                                          {"dx": 0, "dy": 0, "dphi": "x"}]))
        assert err["field"] == "actions[1].dphi"
        err = _one(s, dict(base, actions=["go"]))
        assert err["field"] == "actions[0]"

    def test_unknown_view_session_continues(self):
        s = _session()
        err = _one(s, {"type": "whatif", "view": "zenith", "actions": []})
        assert err["type"] == "error" and err["field"] == "view"
        err = _one(s, {"type": "whatif", "view": "front", "actions": []})
        assert err["field"] == "view" and "training set" in err["error"]
        out = _one(s, {"type": "action", "dx": 0.0, "dy": 0.0, "dphi": 0.0})
        assert out["type"] == "frame"

    def test_ticks_are_monotone_and_shared(self):
        s = _session()
        s.handle({"type": "configure", "imagined_views": ["bev"]})
        ticks = []
        for _ in range(3):
            out = s.handle({"type": "action", "dx": 0.05, "dy": 0.0,
                            "dphi": 0.1})
            assert len({m["tick"] for m in out}) == 1
            ticks.append(out[0]["tick"])
        assert ticks == [1, 2, 3]

    def test_reset_returns_ack_and_truth_frame(self):
        s = _session()
        s.handle({"type": "action", "dx": 0.1, "dy": 0.0, "dphi": 0.0})
        out = s.handle({"type": "reset", "seed": 3})
        assert [m["type"] for m in out] == ["reset", "frame"]
        assert out[0]["tick"] == 0 and out[1]["tick"] == 0
        assert out[0]["pose"] == out[1]["pose"]
        assert s.tick == 0

    def test_reset_is_reproducible(self):
        a, b = _session(), _session()
        fa = a.handle({"type": "reset", "seed": 42})
        fb = b.handle({"type": "reset", "seed": 42})
        assert fa[0]["pose"] == fb[0]["pose"]
        assert np.array_equal(decode_frame(fa[1]["payload"]),
                              decode_frame(fb[1]["payload"]))
        fc = b.handle({"type": "reset", "seed": 43})
        assert fc[0]["pose"] != fa[0]["pose"]

    def test_reset_with_explicit_pose(self):
        s = _session()
        target = [s.state.x, s.state.y, 0.25]
        out = s.handle({"type": "reset", "seed": 9, "pose": target})
        assert out[0]["type"] == "reset"
        assert out[0]["pose"] == pytest.approx(target, abs=1e-6)

    def test_reset_rejects_blocked_pose_without_side_effects(self):
        s = _session()
        s.handle({"type": "action", "dx": 0.1, "dy": 0.0, "dphi": 0.0})
        world, pose, tick = s.world, s.state, s.tick
        assert not is_free(world, 0.0, 0.0, WorldConfig().agent_radius)
        err = _one(s, {"type": "reset", "seed": 9, "pose": [0.0, 0.0, 0.0]})
        assert err["type"] == "error" and err["field"] == "pose"
        assert s.world is world and s.state == pose and s.tick == tick

    def test_unknown_type_and_non_object(self):
        s = _session()
        err = _one(s, {"type": "warp"})
        assert err["field"] == "type"
        err = _one(s, ["not", "an", "object"])
        assert err["type"] == "error"
        err = _one(s, {"tick": 3})
        assert err["field"] == "type"

    def test_truth_bev_frames_carry_the_marker(self):
        # the wire frames are real renders: the agent marker in a truth BEV
        # frame must sit where the pose projects
        s = _session(size=64, seed=2)
        s.handle({"type": "configure", "steer_view": "bev"})
        rng = np.random.default_rng(0)
        for _ in range(5):
            out = _one(s, {"type": "action",
                           "dx": float(rng.uniform(-0.2, 0.2)),
                           "dy": float(rng.uniform(-0.2, 0.2)),
                           "dphi": float(rng.uniform(-0.3, 0.3))})
            det = detect_marker(decode_frame(out["payload"]))
            assert det.found
            u, v = project_to_bev(s.world, s.state.x, s.state.y, 64)
            assert abs(det.u - u) <= 1.0 and abs(det.v - v) <= 1.0


def _load_gen_module():
    spec = importlib.util.spec_from_file_location(
        "gen_transcript", GOLDEN / "gen_transcript.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


class TestGoldenTranscript:
    def test_replay_matches_recording(self):
        gen = _load_gen_module()
        lines = [json.loads(line) for line in
                 (GOLDEN / "session_transcript.jsonl").read_text()
                 .splitlines()]
        session = gen.build_session()
        got = [session.hello()]
        expected = [lines[0]["msg"]]
        for rec in lines[1:]:
            if rec["dir"] == "client":
                got.extend(session.handle(rec["msg"]))
            else:
                expected.append(rec["msg"])
        assert len(got) == len(expected)
        for ours, theirs in zip(got, expected):
            assert {k: v for k, v in ours.items() if k != "payload"} == \
                   {k: v for k, v in theirs.items() if k != "payload"}
            if "payload" not in theirs:
                continue
            a = decode_frame(ours["payload"]).astype(np.int16)
            b = decode_frame(theirs["payload"]).astype(np.int16)
            if theirs["source"] == "truth":
                assert np.array_equal(a, b)
            else:
                # model frames pass through matmuls; allow for BLAS drift
                assert np.abs(a - b).max() <= 3

    def test_transcript_covers_every_message_type(self):
        lines = [json.loads(line) for line in
                 (GOLDEN / "session_transcript.jsonl").read_text()
                 .splitlines()]
        client = {rec["msg"]["type"] for rec in lines
                  if rec["dir"] == "client"}
        server = {rec["msg"]["type"] for rec in lines
                  if rec["dir"] == "server"}
        assert client == {"configure", "action", "whatif", "reset"}
        assert server == {"hello", "configure", "reset", "frame", "error"}


class TestServer:
    def _service(self):
        model, schedule = _tiny_model()
        return Service(model, schedule, "deadbeef0000", WorldConfig(),
                       RenderConfig(size=16), seed=0, fps=5.0,
                       live_steps=2, whatif_steps=2)

    def test_connection_lifecycle(self):
        from websockets.asyncio.client import connect
        from websockets.asyncio.server import serve

        service = self._service()

        async def scenario():
            async with serve(service.handler, "127.0.0.1", 0) as server:
                port = server.sockets[0].getsockname()[1]
                uri = f"ws://127.0.0.1:{port}"
                async with connect(uri) as ws:
                    hello = json.loads(await ws.recv())
                    assert hello["type"] == "hello"
                    assert hello["session"] == "s0001"

                    await ws.send(json.dumps(
                        {"type": "configure", "imagined_views": ["bev"]}))
                    # two actions queued back to back; replies must come
                    # back grouped and in order
                    for _ in range(2):
                        await ws.send(json.dumps(
                            {"type": "action", "dx": 0.1, "dy": 0.0,
                             "dphi": 0.0}))
                    ack = json.loads(await ws.recv())
                    assert ack["type"] == "configure"
                    order = []
                    for _ in range(4):
                        msg = json.loads(await ws.recv())
                        assert msg["type"] == "frame"
                        order.append((msg["tick"], msg["source"]))
                    assert order == [(1, "truth"), (1, "imagined"),
                                     (2, "truth"), (2, "imagined")]

                    await ws.send("{this is not json")
                    err = json.loads(await ws.recv())
                    assert err["type"] == "error" and err["field"] == "json"

                    await ws.send(json.dumps(
                        {"type": "whatif", "view": "ego", "actions": []}))
                    frame = json.loads(await ws.recv())
                    assert frame["source"] == "whatif" and frame["k"] == 1

                async with connect(uri) as ws:
                    hello = json.loads(await ws.recv())
                    assert hello["session"] == "s0002"

        asyncio.run(scenario())

    def test_sessions_get_distinct_worlds(self):
        service = self._service()
        a, b = service.open_session(), service.open_session()
        assert a.id != b.id
        assert (a.state.x, a.state.y) != (b.state.x, b.state.y)
