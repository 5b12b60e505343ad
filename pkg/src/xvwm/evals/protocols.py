"""Evaluation protocols: BEV marker localization, trajectory consistency,
spawn-anywhere, and the cross-view metric matrix.

Anchors are deterministic (evenly spaced over the valid range of each
episode), so a report is a pure function of (predictor, episodes, protocol,
seed). The seed only feeds the predictor's sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..data import Episode
from ..errors import ConfigurationError
from ..worldsim import (AgentState, RenderConfig, ViewId, WorldConfig,
                        make_world, project_to_bev, render)
from .markers import detect_marker
from .metrics import best_metrics, bootstrap_ci, pixel_metrics

EVAL_SALT = 0x4556414C

# success thresholds: 5 px and 10 px at 224px resolution, scaled and
# rounded to the nearest half pixel (ties up)
_THRESH_BASE = (5.0, 10.0)
_THRESH_REF_SIZE = 224.0

MATRIX_CAVEAT = (
    "BEV-target cells are dominated by the static arena map, which is "
    "identical across time; their scores mostly reflect map fidelity and "
    "understate pose error relative to ego-target cells."
)


def success_thresholds(image_size: int) -> tuple[float, float]:
    a, b = (math.floor(t * image_size / _THRESH_REF_SIZE * 2.0 + 0.5) / 2.0
            for t in _THRESH_BASE)
    return a, b


@dataclass(frozen=True)
class EvalProtocol:
    horizon: int = 20               # frames ahead for anchored predictions
    anchors_per_episode: int = 3
    n_ctx: int = 4
    metrics: tuple[str, ...] = ("mse", "psnr", "ssim")

    def validate(self) -> None:
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1 frame")
        if self.anchors_per_episode < 1:
            raise ConfigurationError("need at least one anchor per episode")
        if self.n_ctx < 1:
            raise ConfigurationError("need at least one context frame")
        bad = set(self.metrics) - {"mse", "psnr", "ssim"}
        if bad:
            raise ConfigurationError(f"unknown metrics {sorted(bad)}")


def anchor_times(episode_length: int, protocol: EvalProtocol) -> list[int]:
    """Evenly spaced anchors leaving room for context before and target after."""
    lo = protocol.n_ctx - 1
    hi = episode_length - 1 - protocol.horizon
    if hi < lo:
        raise ConfigurationError(
            f"episode of {episode_length} frames too short for context "
            f"{protocol.n_ctx} plus horizon {protocol.horizon}")
    ts = np.linspace(lo, hi, protocol.anchors_per_episode)
    return sorted(set(int(round(t)) for t in ts))


def _check_views(predictor, needed: list[ViewId],
                 episodes: list[Episode]) -> None:
    have = getattr(predictor, "views", None)
    for v in needed:
        if have is not None and v not in have:
            raise ConfigurationError(
                f"predictor {predictor.name} has no view "
                f"{v.short_name}; it knows {[w.short_name for w in have]}")
        for ep in episodes:
            if v not in ep.frames:
                raise ConfigurationError(
                    f"episode {ep.episode_id} carries no {v.short_name} frames")


def _eval_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([EVAL_SALT, seed]))


# -- localization --------------------------------------------------------------


@dataclass(frozen=True)
class LocalizationRow:
    input_view: ViewId
    median_px: float            # over valid detections; nan if none
    success_a: float            # fraction below threshold a; misses include
    success_b: float            # invalid detections
    n: int                      # anchors evaluated
    invalid: int                # anchors with no detected marker


@dataclass(frozen=True)
class LocalizationReport:
    image_size: int
    horizon: int
    threshold_a: float
    threshold_b: float
    rows: tuple[LocalizationRow, ...]

    def row(self, view: ViewId) -> LocalizationRow:
        for r in self.rows:
            if r.input_view == view:
                return r
        raise KeyError(view)


def localization_eval(predictor, episodes: list[Episode],
                      world_config: WorldConfig,
                      protocol: EvalProtocol = EvalProtocol(),
                      input_views: tuple[ViewId, ...] | None = None,
                      seed: int = 0) -> LocalizationReport:
    """Marker-in-BEV localization at the protocol horizon.

    For every anchor and input view, the predictor renders a BEV frame at
    t + horizon; the error is the distance between the detected marker
    centroid and the projected true pose. Frames without a detectable
    marker count as misses at every threshold and are left out of the
    median, with their count reported.
    """
    protocol.validate()
    if not episodes:
        raise ConfigurationError("no episodes to evaluate")
    if input_views is None:
        input_views = tuple(episodes[0].frames.keys())
    _check_views(predictor, [ViewId.BEV, *input_views], episodes)

    size = episodes[0].size
    a, b = success_thresholds(size)
    rng = _eval_rng(seed)
    errors: dict[ViewId, list[float]] = {v: [] for v in input_views}
    invalid = {v: 0 for v in input_views}

    from .predictors import EvalRequest
    for ep in episodes:
        world = make_world(ep.world_seed, world_config)
        for t in anchor_times(ep.length, protocol):
            x, y, _ = ep.poses[t + protocol.horizon].astype(np.float64)
            gu, gv = project_to_bev(world, x, y, size)
            for v in input_views:
                frame = predictor.predict(
                    EvalRequest(ep, t, protocol.horizon, v, ViewId.BEV,
                                protocol.n_ctx), rng)
                det = detect_marker(frame)
                if not det.found:
                    invalid[v] += 1
                else:
                    errors[v].append(math.hypot(det.u - gu, det.v - gv))

    rows = []
    for v in input_views:
        e = np.asarray(errors[v])
        n = e.size + invalid[v]
        rows.append(LocalizationRow(
            input_view=v,
            median_px=float(np.median(e)) if e.size else float("nan"),
            success_a=float((e < a).sum() / n) if n else 0.0,
            success_b=float((e < b).sum() / n) if n else 0.0,
            n=n, invalid=invalid[v]))
    return LocalizationReport(size, protocol.horizon, a, b, tuple(rows))


# -- trajectory ----------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryTrace:
    timestamps: np.ndarray      # f64 [N] seconds, strictly increasing
    gt_uv: np.ndarray           # f64 [N,2] projected true positions, px
    pred_uv: np.ndarray         # f64 [N,2]; nan rows where detection failed
    errors: np.ndarray          # f64 [N]; nan where detection failed
    mean_px: float
    median_px: float
    max_px: float
    invalid: int


def trajectory_eval(predictor, episode: Episode, world_config: WorldConfig,
                    stride: int = 1, n_ctx: int = 4,
                    seed: int = 0) -> TrajectoryTrace:
    """Next-frame BEV tracking from sliding ego context over a whole episode."""
    if stride < 1:
        raise ConfigurationError("stride must be >= 1")
    _check_views(predictor, [ViewId.EGO, ViewId.BEV], [episode])
    if episode.length < n_ctx + 1:
        raise ConfigurationError(
            f"episode of {episode.length} frames too short for {n_ctx} "
            "context frames plus one prediction")

    size = episode.size
    world = make_world(episode.world_seed, world_config)
    rng = _eval_rng(seed)

    from .predictors import EvalRequest
    ts, gts, preds, errs = [], [], [], []
    invalid = 0
    for t in range(n_ctx - 1, episode.length - 1, stride):
        x, y, _ = episode.poses[t + 1].astype(np.float64)
        gu, gv = project_to_bev(world, x, y, size)
        frame = predictor.predict(
            EvalRequest(episode, t, 1, ViewId.EGO, ViewId.BEV, n_ctx), rng)
        det = detect_marker(frame)
        ts.append((t + 1) / episode.fps)
        gts.append((gu, gv))
        if det.found:
            preds.append((det.u, det.v))
            errs.append(math.hypot(det.u - gu, det.v - gv))
        else:
            invalid += 1
            preds.append((float("nan"), float("nan")))
            errs.append(float("nan"))

    errs = np.asarray(errs)
    ok = errs[~np.isnan(errs)]
    return TrajectoryTrace(
        timestamps=np.asarray(ts), gt_uv=np.asarray(gts),
        pred_uv=np.asarray(preds), errors=errs,
        mean_px=float(ok.mean()) if ok.size else float("nan"),
        median_px=float(np.median(ok)) if ok.size else float("nan"),
        max_px=float(ok.max()) if ok.size else float("nan"),
        invalid=invalid)


# -- spawn anywhere ------------------------------------------------------------


@dataclass(frozen=True)
class SpawnAnchor:
    episode_id: int
    t: int
    exact: dict[str, float]     # scored against the episode's own sky
    agnostic: dict[str, float]  # best score over every sky palette


@dataclass(frozen=True)
class SpawnReport:
    anchors: tuple[SpawnAnchor, ...]
    summary_exact: dict[str, float]     # means over anchors
    summary_agnostic: dict[str, float]
    baseline_gray: dict[str, float]     # constant-gray scores, same anchors


def _mean_scores(rows: list[dict[str, float]]) -> dict[str, float]:
    return {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}


def spawn_eval(predictor, episodes: list[Episode],
               world_config: WorldConfig, render_config: RenderConfig,
               protocol: EvalProtocol = EvalProtocol(),
               seed: int = 0) -> SpawnReport:
    """Ego view one frame ahead of pure BEV context.

    BEV context cannot reveal the sky, so next to the exact-sky score each
    anchor also gets a sky-agnostic score: the best over ground-truth
    renders under every palette. A constant-gray baseline runs in the same
    pass for scale.
    """
    protocol.validate()
    if not episodes:
        raise ConfigurationError("no episodes to evaluate")
    _check_views(predictor, [ViewId.BEV, ViewId.EGO], episodes)

    rng = _eval_rng(seed)
    from .predictors import EvalRequest
    anchors: list[SpawnAnchor] = []
    gray_rows: list[dict[str, float]] = []
    for ep in episodes:
        world = make_world(ep.world_seed, world_config)
        gray = np.full((ep.size, ep.size, 3), 128, dtype=np.uint8)
        for t in anchor_times(ep.length, protocol):
            pose = ep.poses[t + 1].astype(np.float64)
            state = AgentState(*pose.tolist())
            frame = predictor.predict(
                EvalRequest(ep, t, 1, ViewId.BEV, ViewId.EGO,
                            protocol.n_ctx), rng)
            gt = ep.frames[ViewId.EGO][t + 1]
            exact = pixel_metrics(frame, gt)
            per_sky = [pixel_metrics(
                frame, render(world.with_sky(s), state, ViewId.EGO,
                              render_config))
                for s in range(world_config.num_skies)]
            anchors.append(SpawnAnchor(ep.episode_id, t, exact,
                                       best_metrics(per_sky + [exact])))
            gray_rows.append(pixel_metrics(gray, gt))

    return SpawnReport(
        anchors=tuple(anchors),
        summary_exact=_mean_scores([a.exact for a in anchors]),
        summary_agnostic=_mean_scores([a.agnostic for a in anchors]),
        baseline_gray=_mean_scores(gray_rows))


# -- cross-view metric matrix ----------------------------------------------------


@dataclass(frozen=True)
class MatrixCell:
    src_view: ViewId
    tgt_view: ViewId
    n: int
    stats: dict[str, tuple[float, float, float]]   # metric -> (mean, lo, hi)


@dataclass(frozen=True)
class MatrixReport:
    views: tuple[ViewId, ...]
    horizon: int
    cells: tuple[MatrixCell, ...]
    caveat: str = field(default=MATRIX_CAVEAT)

    def cell(self, src: ViewId, tgt: ViewId) -> MatrixCell:
        for c in self.cells:
            if c.src_view == src and c.tgt_view == tgt:
                return c
        raise KeyError((src, tgt))


def metric_matrix(predictor, episodes: list[Episode],
                  protocol: EvalProtocol = EvalProtocol(),
                  views: tuple[ViewId, ...] | None = None,
                  seed: int = 0, n_resamples: int = 1000) -> MatrixReport:
    """Pixel metrics for every ordered (input view, output view) pair,
    averaged over anchors, with bootstrap confidence intervals per cell."""
    protocol.validate()
    if not episodes:
        raise ConfigurationError("no episodes to evaluate")
    if views is None:
        views = tuple(episodes[0].frames.keys())
    _check_views(predictor, list(views), episodes)

    rng = _eval_rng(seed)
    from .predictors import EvalRequest
    scores: dict[tuple[ViewId, ViewId], list[dict[str, float]]] = {
        (s, t): [] for s in views for t in views}
    for ep in episodes:
        for t in anchor_times(ep.length, protocol):
            for sv in views:
                for tv in views:
                    frame = predictor.predict(
                        EvalRequest(ep, t, protocol.horizon, sv, tv,
                                    protocol.n_ctx), rng)
                    gt = ep.frames[tv][t + protocol.horizon]
                    scores[(sv, tv)].append(pixel_metrics(frame, gt))

    cells = []
    for sv in views:
        for tv in views:
            rows = scores[(sv, tv)]
            stats = {}
            for m in protocol.metrics:
                vals = np.asarray([r[m] for r in rows])
                lo, hi = bootstrap_ci(vals, seed=seed,
                                      n_resamples=n_resamples)
                stats[m] = (float(vals.mean()), lo, hi)
            cells.append(MatrixCell(sv, tv, len(rows), stats))
    return MatrixReport(views, protocol.horizon, tuple(cells))
