"""View-pair and time-offset sampling laws for the three training schemes.

The scalar ops are the contract; the vectorized variants draw whole
batches at once and are what the trainer uses. Both obey the same laws:

    SingleView: always (ego, ego).
    TwoView/FourView: input view uniform; with probability p_x the output
    is uniform over the OTHER views, else output = input. At p_x = 0.5
    that puts TwoView pairs at 0.25 each and FourView same-view pairs at
    1/8, cross-view pairs at 1/24.

    Time offset k: same-view draws are uniform over the 2K nonzero
    offsets; cross-view draws additionally allow k = 0, making them
    uniform over all 2K+1 values. k = 0 with the same view would be a
    copy task, so it is excluded there.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..worldsim import ViewId


class Scheme(enum.Enum):
    SINGLE_VIEW = "single_view"
    TWO_VIEW = "two_view"
    FOUR_VIEW = "four_view"


_SCHEME_VIEWS = {
    Scheme.SINGLE_VIEW: (ViewId.EGO,),
    Scheme.TWO_VIEW: (ViewId.EGO, ViewId.BEV),
    Scheme.FOUR_VIEW: (ViewId.EGO, ViewId.BEV, ViewId.OVER_SHOULDER,
                       ViewId.FRONT),
}


@dataclass(frozen=True)
class SchemeConfig:
    scheme: Scheme = Scheme.TWO_VIEW
    views: tuple[ViewId, ...] | None = None
    cross_view_prob: float = 0.5
    k_train: int = 25
    k_test: int = 20

    def __post_init__(self):
        if self.views is None:
            object.__setattr__(self, "views", _SCHEME_VIEWS[self.scheme])

    def validate(self) -> None:
        want = _SCHEME_VIEWS[self.scheme]
        if tuple(self.views) != want:
            raise ConfigurationError(
                f"{self.scheme.value} requires views "
                f"{[v.short_name for v in want]}, got "
                f"{[v.short_name for v in self.views]}")
        if self.scheme is Scheme.SINGLE_VIEW and self.cross_view_prob != 0.0:
            raise ConfigurationError("single_view cannot cross views")
        if not 0.0 <= self.cross_view_prob <= 1.0:
            raise ConfigurationError("cross_view_prob must be in [0, 1]")
        if self.k_train < 1 or self.k_test < 1:
            raise ConfigurationError("horizons must be at least 1 frame")


def sample_view_pair(scheme: SchemeConfig,
                     rng: np.random.Generator) -> tuple[ViewId, ViewId]:
    if scheme.scheme is Scheme.SINGLE_VIEW:
        return ViewId.EGO, ViewId.EGO
    views = scheme.views
    src = views[rng.integers(len(views))]
    if rng.random() >= scheme.cross_view_prob:
        return src, src
    others = [v for v in views if v != src]
    return src, others[rng.integers(len(others))]


def sample_view_pairs(scheme: SchemeConfig, rng: np.random.Generator,
                      n: int) -> tuple[np.ndarray, np.ndarray]:
    """n draws at once; returns (src, tgt) arrays of ViewId values."""
    views = np.array([int(v) for v in scheme.views])
    if scheme.scheme is Scheme.SINGLE_VIEW:
        e = np.full(n, int(ViewId.EGO))
        return e, e.copy()
    src_idx = rng.integers(len(views), size=n)
    cross = rng.random(n) < scheme.cross_view_prob
    # uniform over the other views: shift by 1..len-1 around the ring
    shift = rng.integers(1, len(views), size=n)
    tgt_idx = np.where(cross, (src_idx + shift) % len(views), src_idx)
    return views[src_idx], views[tgt_idx]


def sample_time_offset(scheme: SchemeConfig, rng: np.random.Generator,
                       cross: bool) -> int:
    k = scheme.k_train
    if cross:
        return int(rng.integers(-k, k + 1))
    u = int(rng.integers(2 * k))
    return u - k if u < k else u - k + 1


def sample_time_offsets(scheme: SchemeConfig, rng: np.random.Generator,
                        cross: np.ndarray) -> np.ndarray:
    k = scheme.k_train
    n = cross.shape[0]
    full = rng.integers(-k, k + 1, size=n)
    u = rng.integers(2 * k, size=n)
    nonzero = np.where(u < k, u - k, u - k + 1)
    return np.where(cross, full, nonzero)
