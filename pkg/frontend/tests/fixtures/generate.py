"""Regenerate marker_cases.json: bird's-eye frames rendered at 64 px with
the reference detector's output frozen next to each payload. The TypeScript
detector must reproduce u, v, angle and count on the decoded pixels.

Run from this directory with the xvwm package installed:
    python3 generate.py
"""

import base64
import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

from xvwm.evals import detect_marker
from xvwm.worldsim import (AgentState, RenderConfig, ViewId, WorldConfig,
                           make_world, render)

OUT = Path(__file__).parent / "marker_cases.json"

POSES = [
    (4.2, 7.9, 0.0),
    (11.3, 3.4, 2.2),
    (8.0, 12.6, 4.9),
]


def main() -> None:
    world = make_world(424242, WorldConfig())
    rcfg = RenderConfig(size=64)
    cases = []
    for x, y, yaw in POSES:
        frame = render(world, AgentState(x, y, yaw), ViewId.BEV, rcfg)
        det = detect_marker(frame)
        buf = io.BytesIO()
        Image.fromarray(frame).save(buf, format="png")
        cases.append({
            "pose": [x, y, yaw],
            "payload": base64.b64encode(buf.getvalue()).decode("ascii"),
            "size": 64,
            "found": det.found,
            "u": det.u,
            "v": det.v,
            "angle": det.angle,
            "count": det.pixel_count,
            "pixel_sum": int(frame.astype(np.int64).sum()),
        })
    OUT.write_text(json.dumps(cases, indent=1))
    print(f"wrote {OUT} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
