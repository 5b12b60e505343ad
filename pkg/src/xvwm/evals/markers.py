"""Red marker localization in top-down frames.

Pixels are selected by a fixed color threshold and weighted by their red
excess, which is proportional to marker coverage on the neutral map floor.
The weighted mean of the selected pixel centers recovers the sub-pixel
centroid; the weighted principal axis recovers heading up to sign. The sign
comes from the third moment of mass along the axis: the triangular marker
is wider at the base, so its mass distribution has a long thin tail on the
tip side and the skewness points at the tip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

R_MIN, G_MAX, B_MAX = 200, 80, 80
MIN_PIXELS = 4


@dataclass(frozen=True)
class MarkerDetection:
    found: bool
    u: float               # centroid, continuous image coords
    v: float
    angle: float            # heading of the principal axis, [0, 2pi)
    pixel_count: int
    ambiguous: bool         # disconnected red blobs farther apart than one marker


def detect_marker(frame: np.ndarray, marker_len_px: float | None = None
                  ) -> MarkerDetection:
    """Locate the agent marker in a u8 RGB frame.

    ``marker_len_px`` sets the blob separation treated as ambiguous; by
    default it scales with the frame the way the stamped marker does.
    """
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError("expected an RGB frame [H, W, 3]")
    size = frame.shape[0]
    if marker_len_px is None:
        marker_len_px = 17.0 / 224.0 * size

    r = frame[:, :, 0].astype(np.int32)
    g = frame[:, :, 1].astype(np.int32)
    b = frame[:, :, 2].astype(np.int32)
    mask = (r >= R_MIN) & (g <= G_MAX) & (b <= B_MAX)
    count = int(mask.sum())
    if count < MIN_PIXELS:
        return MarkerDetection(False, math.nan, math.nan, math.nan, count, False)

    w = np.maximum(0, r - np.maximum(g, b)).astype(np.float64) * mask
    total = w.sum()
    vs, us = np.nonzero(mask)
    wk = w[vs, us]
    uc = us + 0.5
    vc = vs + 0.5
    mu_u = float((wk * uc).sum() / total)
    mu_v = float((wk * vc).sum() / total)

    du = uc - mu_u
    dv = vc - mu_v
    cuu = float((wk * du * du).sum() / total)
    cvv = float((wk * dv * dv).sum() / total)
    cuv = float((wk * du * dv).sum() / total)
    theta = 0.5 * math.atan2(2.0 * cuv, cuu - cvv)
    ex, ey = math.cos(theta), math.sin(theta)

    proj = du * ex + dv * ey
    skew = float((wk * proj ** 3).sum())
    if skew == 0.0:     # degenerate blob: fall back to the farthest pixel
        far = int(np.argmax(du * du + dv * dv))
        skew = du[far] * ex + dv[far] * ey
    if skew < 0.0:
        ex, ey = -ex, -ey
    angle = math.atan2(ey, ex) % (2.0 * math.pi)

    labels, nblobs = ndimage.label(mask)
    ambiguous = False
    if nblobs > 1:
        centers = ndimage.center_of_mass(mask, labels, range(1, nblobs + 1))
        pts = np.array(centers, dtype=np.float64)   # (row, col) pairs
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        ambiguous = bool(np.sqrt(d2.max()) > marker_len_px)

    return MarkerDetection(True, mu_u, mu_v, angle, count, ambiguous)
