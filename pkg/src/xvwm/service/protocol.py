"""Wire protocol pieces shared by server and tests.

One JSON object per text message. Client to server: ``configure``,
``action``, ``whatif``, ``reset``. Server to client: ``hello``, ``configure``
and ``reset`` acknowledgements, ``frame``, ``error``. Every message carries
``type`` and ``tick``; frames add ``view``, ``encoding`` ("png-base64"),
``payload``, and ``source`` ("truth", "imagined" or "whatif", the last with
its lookahead ``k``). Errors echo the offending ``field`` when known.
"""

from __future__ import annotations

import base64
import io
import math

import numpy as np

from ..errors import ProtocolError

PROTOCOL_VERSION = 1
ENCODING = "png-base64"

CLIENT_TYPES = ("configure", "action", "whatif", "reset")
SERVER_TYPES = ("hello", "configure", "reset", "frame", "error")


class Malformed(ProtocolError):
    """Invalid message; remembers which field to echo back."""

    def __init__(self, field: str, detail: str):
        super().__init__(detail)
        self.field = field


def encode_frame(frame: np.ndarray) -> str:
    from PIL import Image

    if frame.dtype != np.uint8 or frame.ndim != 3 or frame.shape[2] != 3:
        raise ProtocolError("frame must be u8 RGB [H, W, 3]")
    buf = io.BytesIO()
    Image.fromarray(frame).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_frame(payload: str) -> np.ndarray:
    from PIL import Image

    try:
        raw = base64.b64decode(payload.encode("ascii"), validate=True)
        with Image.open(io.BytesIO(raw)) as img:
            return np.asarray(img.convert("RGB"))
    except ProtocolError:
        raise
    except Exception as e:
        raise ProtocolError(
            f"payload is not a png-base64 frame: {e}") from None


def need(msg: dict, field: str, kinds, what: str):
    """Fetch a typed field or raise Malformed naming it."""
    if field not in msg:
        raise Malformed(field, f"missing field {field!r} ({what})")
    v = msg[field]
    if isinstance(v, bool) and kinds is not bool:
        raise Malformed(field, f"field {field!r} must be {what}")
    if kinds is not None and not isinstance(v, kinds):
        raise Malformed(field, f"field {field!r} must be {what}, "
                               f"got {type(v).__name__}")
    return v


def need_number(msg: dict, field: str, limit: float | None = None) -> float:
    v = float(need(msg, field, (int, float), "a number"))
    if not math.isfinite(v):
        raise Malformed(field, f"field {field!r} must be finite")
    if limit is not None and abs(v) > limit + 1e-9:
        raise Malformed(field, f"field {field!r} exceeds the bound {limit}")
    return v


def need_int(msg: dict, field: str) -> int:
    return int(need(msg, field, int, "an integer"))
