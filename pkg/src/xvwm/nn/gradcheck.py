"""Central finite-difference verification of analytic gradients.

Runs the loss twice per probed coordinate with the parameter nudged by
±h, compares the slope against the gradient backward() produced, and
reports the worst relative error. Relative error uses
|a − n| / max(|a|, |n|, floor) so coordinates where both values are tiny
do not divide noise by noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, no_grad


@dataclass
class GradCheckReport:
    max_rel_err: float
    worst_param: str
    per_param: dict[str, float]
    checked: int

    def ok(self, tolerance: float) -> bool:
        return self.max_rel_err < tolerance


def finite_diff_check(f, params: dict[str, Tensor], h: float = 1e-5,
                      max_coords_per_param: int | None = None,
                      rel_floor: float = 1e-3,
                      seed: int = 0) -> GradCheckReport:
    """``f()`` must rebuild its graph from ``params`` and return a scalar
    Tensor, deterministically. Parameters should be f64 for a meaningful
    comparison at h=1e-5. Coordinates are probed exhaustively unless
    ``max_coords_per_param`` caps them (then a seeded subset is used)."""
    loss = f()
    loss.backward()
    analytic = {k: (np.zeros_like(p.data) if p.grad is None else p.grad.copy())
                for k, p in params.items()}
    for p in params.values():
        p.grad = None

    rng = np.random.default_rng(seed)
    per_param: dict[str, float] = {}
    worst, worst_name, checked = 0.0, "", 0
    for name, p in params.items():
        flat = p.data.reshape(-1)
        idxs = np.arange(flat.size)
        if max_coords_per_param is not None and flat.size > max_coords_per_param:
            idxs = rng.choice(flat.size, size=max_coords_per_param, replace=False)
        worst_here = 0.0
        for i in idxs:
            keep = flat[i]
            with no_grad():
                flat[i] = keep + h
                up = float(f().data)
                flat[i] = keep - h
                dn = float(f().data)
                flat[i] = keep
            numeric = (up - dn) / (2.0 * h)
            a = float(analytic[name].reshape(-1)[i])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), rel_floor)
            worst_here = max(worst_here, rel)
            checked += 1
        per_param[name] = worst_here
        if worst_here > worst:
            worst, worst_name = worst_here, name

    for k, p in params.items():    # leave the analytic grads in place for callers
        p.grad = analytic[k]
    return GradCheckReport(max_rel_err=worst, worst_param=worst_name,
                           per_param=per_param, checked=checked)
