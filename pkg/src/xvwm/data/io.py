"""Binary episode container.

Little-endian layout:

    magic    4s   "XVWM"
    version  u16  currently 1
    n_views  u8
    codes    u8 * n_views      view ids, header order = frame block order
    height   u16
    width    u16
    channels u8                always 3
    fps      u16               frames per second * 100
    length   u32               frames per view
    episode  u32
    wseed    u32               world seed
    sky      u8
    actions  f32 * length*3
    poses    f32 * length*3
    frames   u8, one block per view, [length, H, W, C] each

Frames can be memory-mapped so a dataset larger than RAM stays cheap to
open; actions and poses are always materialized.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..worldsim import ViewId
from .episode import Episode

MAGIC = b"XVWM"
VERSION = 1
_HEAD = struct.Struct("<4sHB")
_GEOM = struct.Struct("<HHBHIIIB")


def episode_path(root: str | os.PathLike, episode_id: int) -> Path:
    return Path(root) / "episodes" / f"ep_{episode_id:05d}.xvwm"


def write_episode(ep: Episode, path: str | os.PathLike) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    T = ep.length
    size = ep.size
    if ep.actions.shape != (T, 3) or ep.poses.shape != (T, 3):
        raise FormatError("actions/poses must both be [T,3]")
    with open(p, "wb") as f:
        f.write(_HEAD.pack(MAGIC, VERSION, len(ep.views)))
        f.write(bytes(int(v) for v in ep.views))
        f.write(_GEOM.pack(size, size, 3, round(ep.fps * 100), T,
                           ep.episode_id, ep.world_seed, ep.sky_id))
        f.write(np.ascontiguousarray(ep.actions, dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(ep.poses, dtype="<f4").tobytes())
        for v in ep.views:
            fr = ep.frames[v]
            if fr.shape != (T, size, size, 3) or fr.dtype != np.uint8:
                raise FormatError(f"frames[{v.short_name}] must be u8 [T,{size},{size},3]")
            f.write(np.ascontiguousarray(fr).tobytes())


def read_episode(path: str | os.PathLike, mmap: bool = False) -> Episode:
    """Parse an episode file; with ``mmap`` frames stay on disk until sliced."""
    p = Path(path)
    try:
        raw_head = open(p, "rb")
    except OSError as e:
        raise FormatError(f"cannot open {p}: {e}") from e
    with raw_head as f:
        head = f.read(_HEAD.size)
        if len(head) < _HEAD.size:
            raise FormatError(f"{p}: truncated header")
        magic, version, n_views = _HEAD.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"{p}: bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"{p}: unsupported version {version}")
        if n_views < 1:
            raise FormatError(f"{p}: no views")
        codes = f.read(n_views)
        if len(codes) < n_views:
            raise FormatError(f"{p}: truncated view table")
        try:
            views = tuple(ViewId(c) for c in codes)
        except ValueError as e:
            raise FormatError(f"{p}: unknown view code ({e})") from e
        if len(set(views)) != len(views):
            raise FormatError(f"{p}: duplicate views")
        geom = f.read(_GEOM.size)
        if len(geom) < _GEOM.size:
            raise FormatError(f"{p}: truncated geometry header")
        h, w, c, fps100, T, episode_id, world_seed, sky_id = _GEOM.unpack(geom)
        if c != 3:
            raise FormatError(f"{p}: expected 3 channels, got {c}")
        if h != w:
            raise FormatError(f"{p}: frames must be square, got {h}x{w}")
        if T < 1:
            raise FormatError(f"{p}: empty episode")

        vec_bytes = T * 3 * 4
        arr = f.read(2 * vec_bytes)
        if len(arr) < 2 * vec_bytes:
            raise FormatError(f"{p}: truncated action/pose block")
        actions = np.frombuffer(arr[:vec_bytes], dtype="<f4").reshape(T, 3).copy()
        poses = np.frombuffer(arr[vec_bytes:], dtype="<f4").reshape(T, 3).copy()
        frames_at = f.tell()

    frame_bytes = T * h * w * c
    expect = frames_at + n_views * frame_bytes
    actual = p.stat().st_size
    if actual != expect:
        raise FormatError(f"{p}: size {actual}, layout implies {expect}")

    frames: dict[ViewId, np.ndarray] = {}
    for i, v in enumerate(views):
        off = frames_at + i * frame_bytes
        if mmap:
            fr = np.memmap(p, dtype=np.uint8, mode="r", offset=off,
                           shape=(T, h, w, c))
        else:
            with open(p, "rb") as f:
                f.seek(off)
                fr = np.frombuffer(f.read(frame_bytes), dtype=np.uint8)
                fr = fr.reshape(T, h, w, c).copy()
        frames[v] = fr

    return Episode(episode_id=episode_id, world_seed=world_seed, sky_id=sky_id,
                   fps=fps100 / 100.0, views=views, actions=actions,
                   poses=poses, frames=frames)
