"""Checkpoint container.

Layout, little-endian throughout:

    magic            8s      "XVWMCKPT"
    version          u16     1
    step             u32     training steps completed
    config_len       u32     canonical JSON of the model config
    config           bytes
    extra_len        u32     canonical JSON: rng state, exposure counters
    extra            bytes
    num_tensors      u32
    per tensor, sorted by name:
        name_len     u16
        name         bytes   utf-8
        ndim         u8
        dims         u32 * ndim
        payload      f32 * prod(dims)

Tensors are sorted by name so the byte stream is a pure function of the
content; save(load(save(x))) is bit-identical. JSON blobs are canonical
(sorted keys, no whitespace) for the same reason.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, FormatError

MAGIC = b"XVWMCKPT"
VERSION = 1

_HEAD = struct.Struct("<8sHI")


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


@dataclass
class Checkpoint:
    """Everything needed to resume a run bit-exactly."""

    config: dict
    step: int
    tensors: dict[str, np.ndarray]
    extra: dict = field(default_factory=dict)


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    cfg_blob = _canonical(ckpt.config)
    extra_blob = _canonical(ckpt.extra)
    parts = [_HEAD.pack(MAGIC, VERSION, ckpt.step),
             struct.pack("<I", len(cfg_blob)), cfg_blob,
             struct.pack("<I", len(extra_blob)), extra_blob,
             struct.pack("<I", len(ckpt.tensors))]
    for name in sorted(ckpt.tensors):
        arr = np.ascontiguousarray(ckpt.tensors[name], dtype=np.float32)
        nb = name.encode()
        parts.append(struct.pack("<H", len(nb)))
        parts.append(nb)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.astype("<f4", copy=False).tobytes())
    blob = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(blob)


class _Reader:
    def __init__(self, blob: bytes, path):
        self.blob = blob
        self.path = path
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise FormatError(f"{self.path}: truncated checkpoint "
                              f"(wanted {n} bytes at offset {self.pos})")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U8 = struct.Struct("<B")


def load_checkpoint(path, expect_config: dict | None = None) -> Checkpoint:
    """Read a checkpoint; optionally verify the stored config matches."""
    with open(path, "rb") as fh:
        rd = _Reader(fh.read(), path)

    magic, version, step = rd.unpack(_HEAD)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, not a checkpoint")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")

    (cfg_len,) = rd.unpack(_U32)
    config = json.loads(rd.take(cfg_len).decode())
    (extra_len,) = rd.unpack(_U32)
    extra = json.loads(rd.take(extra_len).decode())

    (count,) = rd.unpack(_U32)
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = rd.unpack(_U16)
        name = rd.take(name_len).decode()
        (ndim,) = rd.unpack(_U8)
        dims = struct.unpack(f"<{ndim}I", rd.take(4 * ndim))
        n = int(np.prod(dims, dtype=np.int64)) if ndim else 1
        payload = rd.take(4 * n)
        arr = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
        if name in tensors:
            raise FormatError(f"{path}: duplicate tensor name {name!r}")
        tensors[name] = arr
    if rd.pos != len(rd.blob):
        raise FormatError(f"{path}: {len(rd.blob) - rd.pos} trailing bytes")

    if expect_config is not None:
        diff = _config_diff(expect_config, config)
        if diff:
            raise ConfigurationError(
                "checkpoint config mismatch: " + "; ".join(diff))
    return Checkpoint(config=config, step=step, tensors=tensors, extra=extra)


def _config_diff(expect: dict, stored: dict) -> list[str]:
    lines = []
    for key in sorted(set(expect) | set(stored)):
        if key not in stored:
            lines.append(f"{key}: expected {expect[key]!r}, missing in file")
        elif key not in expect:
            lines.append(f"{key}: file has {stored[key]!r}, not expected")
        elif _norm(expect[key]) != _norm(stored[key]):
            lines.append(f"{key}: expected {expect[key]!r}, "
                         f"file has {stored[key]!r}")
    return lines


def _norm(v):
    # JSON round-trips tuples as lists; compare them as equal.
    if isinstance(v, (list, tuple)):
        return tuple(_norm(x) for x in v)
    return v


# -- bridging to Module / AdamW ---------------------------------------------

def checkpoint_hash(path) -> str:
    """First 12 hex chars of the file's sha256; cited in every report."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]


def restore_model(path) -> tuple:
    """Rebuild a Denoiser and its noise schedule from a checkpoint file.

    Returns (model, schedule, checkpoint); optimizer state in the file is
    left untouched. This is the read path for eval, rollout and serving.
    """
    # imported here so the serializer stays importable on its own
    from .config import ModelConfig
    from .network import Denoiser
    from .schedule import NoiseSchedule

    ck = load_checkpoint(path)
    cfg = ModelConfig.from_json_dict(ck.config)
    model = Denoiser(cfg, np.random.default_rng(0))
    load_model_tensors(model, ck.tensors)
    schedule = NoiseSchedule(cfg.t_diff, cfg.beta_start, cfg.beta_end)
    return model, schedule, ck


def model_tensors(model, prefix: str = "param.") -> dict[str, np.ndarray]:
    return {prefix + name: p.data.astype(np.float32, copy=True)
            for name, p in model.named_parameters().items()}


def load_model_tensors(model, tensors: dict[str, np.ndarray],
                       prefix: str = "param.") -> None:
    """Copy stored arrays into the live parameters, shape-checked."""
    params = model.named_parameters()
    for name, p in params.items():
        key = prefix + name
        if key not in tensors:
            raise FormatError(f"checkpoint missing tensor {key!r}")
        arr = tensors[key]
        if arr.shape != p.data.shape:
            raise FormatError(f"{key}: stored shape {arr.shape} vs "
                              f"model {p.data.shape}")
        p.data[...] = arr.astype(p.data.dtype)
