"""Report rendering: aligned text tables, line-delimited records, SVG plots.

Every header repeats that mse/psnr/ssim stand in for learned perceptual
metrics, and names the checkpoint the numbers came from when one is known.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from ..model import checkpoint_hash  # noqa: E402, F401  (re-export)
from .protocols import (LocalizationReport, MatrixReport, SpawnReport,
                        TrajectoryTrace)
from .transfer import TransferStudy

METRIC_NOTE = ("metrics: mse/psnr/ssim in pixel space stand in for learned "
               "perceptual scores")


def _header(title: str, checkpoint: str | None) -> list[str]:
    lines = [title, METRIC_NOTE]
    if checkpoint is not None:
        lines.append(f"checkpoint: {checkpoint}")
    return lines


def _table(headers: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    out += [fmt.format(*r) for r in rows]
    return out


def format_localization(rep: LocalizationReport,
                        checkpoint: str | None = None) -> str:
    rows = [[r.input_view.short_name + " -> bev",
             f"{r.median_px:.2f}",
             f"{100 * r.success_a:.1f}%",
             f"{100 * r.success_b:.1f}%",
             str(r.n), str(r.invalid)]
            for r in rep.rows]
    lines = _header(f"marker localization at horizon {rep.horizon} frames, "
                    f"{rep.image_size}px", checkpoint)
    lines += _table(["pair", "median px", f"<{rep.threshold_a}px",
                     f"<{rep.threshold_b}px", "n", "invalid"], rows)
    return "\n".join(lines) + "\n"


def format_trajectory(trace: TrajectoryTrace,
                      checkpoint: str | None = None) -> str:
    lines = _header("next-frame trajectory tracking", checkpoint)
    lines.append(f"steps: {len(trace.timestamps)}  invalid: {trace.invalid}")
    lines.append(f"error px  mean {trace.mean_px:.2f}  median "
                 f"{trace.median_px:.2f}  max {trace.max_px:.2f}")
    return "\n".join(lines) + "\n"


def format_spawn(rep: SpawnReport, checkpoint: str | None = None) -> str:
    def row(name, scores):
        return [name] + [f"{scores[m]:.4f}" for m in ("mse", "psnr", "ssim")]

    lines = _header("spawn: ego view from pure bev context", checkpoint)
    lines += _table(["scores", "mse", "psnr", "ssim"],
                    [row("exact sky", rep.summary_exact),
                     row("sky agnostic", rep.summary_agnostic),
                     row("constant gray", rep.baseline_gray)])
    lines.append(f"anchors: {len(rep.anchors)}")
    return "\n".join(lines) + "\n"


def format_matrix(rep: MatrixReport, metric: str = "mse",
                  checkpoint: str | None = None) -> str:
    heads = ["in \\ out"] + [v.short_name for v in rep.views]
    rows = []
    for sv in rep.views:
        row = [sv.short_name]
        for tv in rep.views:
            mean, lo, hi = rep.cell(sv, tv).stats[metric]
            row.append(f"{mean:.4f} [{lo:.4f},{hi:.4f}]")
        rows.append(row)
    lines = _header(f"cross-view {metric} at horizon {rep.horizon} frames "
                    "(mean [95% bootstrap CI])", checkpoint)
    lines += _table(heads, rows)
    lines.append(f"caveat: {rep.caveat}")
    return "\n".join(lines) + "\n"


def format_transfer(study: TransferStudy,
                    checkpoint: str | None = None) -> str:
    rows = [[p.label, p.scheme, str(p.step), str(p.exposure),
             f"{p.mse:.4f}", f"[{p.ci_lo:.4f},{p.ci_hi:.4f}]", str(p.n)]
            for p in study.points]
    lines = _header(f"ego->ego quality vs training exposure, horizon "
                    f"{study.horizon} frames", checkpoint)
    lines += _table(["checkpoint", "scheme", "step", "ego:ego seen", "mse",
                     "95% CI", "n"], rows)
    return "\n".join(lines) + "\n"


# -- machine-readable records ---------------------------------------------------


def localization_records(rep: LocalizationReport) -> list[dict]:
    return [{"kind": "localization", "input_view": r.input_view.short_name,
             "horizon": rep.horizon, "median_px": r.median_px,
             "success_a": r.success_a, "success_b": r.success_b,
             "threshold_a": rep.threshold_a, "threshold_b": rep.threshold_b,
             "n": r.n, "invalid": r.invalid}
            for r in rep.rows]


def trajectory_records(trace: TrajectoryTrace) -> list[dict]:
    return [{"kind": "trajectory_step", "t_s": float(ts),
             "gt_u": float(g[0]), "gt_v": float(g[1]),
             "pred_u": float(p[0]), "pred_v": float(p[1]),
             "error_px": float(e)}
            for ts, g, p, e in zip(trace.timestamps, trace.gt_uv,
                                   trace.pred_uv, trace.errors)]


def spawn_records(rep: SpawnReport) -> list[dict]:
    out = []
    for a in rep.anchors:
        rec = {"kind": "spawn_anchor", "episode": a.episode_id, "t": a.t}
        rec.update({f"exact_{k}": v for k, v in a.exact.items()})
        rec.update({f"agnostic_{k}": v for k, v in a.agnostic.items()})
        out.append(rec)
    return out


def matrix_records(rep: MatrixReport) -> list[dict]:
    out = []
    for c in rep.cells:
        rec = {"kind": "matrix_cell", "src": c.src_view.short_name,
               "tgt": c.tgt_view.short_name, "horizon": rep.horizon,
               "n": c.n}
        for m, (mean, lo, hi) in c.stats.items():
            rec.update({m: mean, f"{m}_lo": lo, f"{m}_hi": hi})
        out.append(rec)
    return out


def transfer_records(study: TransferStudy) -> list[dict]:
    return [{"kind": "transfer_point", "label": p.label, "scheme": p.scheme,
             "step": p.step, "exposure": p.exposure, "mse": p.mse,
             "ci_lo": p.ci_lo, "ci_hi": p.ci_hi, "n": p.n}
            for p in study.points]


def write_records(path: str | Path, records: list[dict]) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")


# -- plots ------------------------------------------------------------------------


def plot_trajectory(trace: TrajectoryTrace, path: str | Path,
                    image_size: int | None = None) -> None:
    """Ground-truth and imagined BEV tracks, color running with time."""
    fig, ax = plt.subplots(figsize=(5, 5))
    t = trace.timestamps
    ax.plot(trace.gt_uv[:, 0], trace.gt_uv[:, 1], "-", color="0.6", lw=1,
            label="ground truth")
    ok = ~np.isnan(trace.pred_uv[:, 0])
    sc = ax.scatter(trace.pred_uv[ok, 0], trace.pred_uv[ok, 1], c=t[ok],
                    cmap="coolwarm", s=12, label="imagined")
    fig.colorbar(sc, ax=ax, label="time [s]")
    if image_size is not None:
        ax.set_xlim(0, image_size)
        ax.set_ylim(image_size, 0)
    else:
        ax.invert_yaxis()
    ax.set_aspect("equal")
    ax.set_xlabel("u [px]")
    ax.set_ylabel("v [px]")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_transfer(study: TransferStudy, path: str | Path) -> None:
    """mse vs ego exposure; single-view points joined, others marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    singles = sorted((p for p in study.points if p.scheme == "single_view"),
                     key=lambda p: p.exposure)
    others = [p for p in study.points if p.scheme != "single_view"]
    if singles:
        xs = [p.exposure for p in singles]
        ys = [p.mse for p in singles]
        yerr = [[p.mse - p.ci_lo for p in singles],
                [p.ci_hi - p.mse for p in singles]]
        ax.errorbar(xs, ys, yerr=yerr, fmt="o-", capsize=3,
                    label="single view")
    for p in others:
        ax.errorbar([p.exposure], [p.mse],
                    yerr=[[p.mse - p.ci_lo], [p.ci_hi - p.mse]],
                    fmt="s", capsize=3, label=f"{p.scheme} ({p.label})")
    ax.set_xlabel("ego:ego pairs seen")
    ax.set_ylabel(f"ego->ego mse at horizon {study.horizon}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
