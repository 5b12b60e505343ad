"""Interactive imagination service: steer a live world, watch the model
predict views it cannot see."""

from .protocol import (CLIENT_TYPES, ENCODING, Malformed, PROTOCOL_VERSION,
                       SERVER_TYPES, decode_frame, encode_frame)
from .server import Service, run_server
from .session import SessionCore

__all__ = [
    "CLIENT_TYPES",
    "ENCODING",
    "Malformed",
    "PROTOCOL_VERSION",
    "SERVER_TYPES",
    "Service",
    "SessionCore",
    "decode_frame",
    "encode_frame",
    "run_server",
]
