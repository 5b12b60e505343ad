"""Every pipeline stage behind one executable.

Each run writes into a fresh directory named <command>-<confighash>-<stamp>
together with a copy of the resolved configuration, so an output tree is
always traceable to the exact settings that produced it. Errors surface as
a single ``error.<Class>: <message>`` line on stderr and a non-zero exit.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from collections import Counter
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import __version__
from ..data import cum_action, build_dataset, load_index, open_dataset
from ..errors import ConfigurationError, FormatError, XvwmError
from ..evals import (ConstantGrayPredictor, CopyLastPredictor,
                     DiffusionPredictor, EvalProtocol, OraclePredictor,
                     localization_eval, metric_matrix, pixel_metrics,
                     spawn_eval, trajectory_eval, transfer_study)
from ..model import (checkpoint_hash, ddim_sample, load_checkpoint,
                     restore_model)
from ..training import (Scheme, SchemeConfig, Trainer, TrainRunConfig,
                        sample_time_offsets, sample_view_pairs)
from ..worldsim import RenderConfig, ViewId, WorldConfig
from .config import (AppConfig, config_dict, config_hash, load_config,
                     _scheme_by_name)


def _stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")


def _fresh_dir(base: Path) -> Path:
    d = base
    for n in range(2, 1000):
        try:
            d.mkdir(parents=True, exist_ok=False)
            return d
        except FileExistsError:
            d = base.with_name(f"{base.name}-{n}")
    raise ConfigurationError(f"cannot allocate a run directory near {base}")


def _run_dir(args, app: AppConfig, command: str) -> Path:
    if getattr(args, "out", None):
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
    else:
        d = _fresh_dir(Path(args.out_root) /
                       f"{command}-{config_hash(app)}-{_stamp()}")
    with open(d / "config.json", "w") as fh:
        json.dump(config_dict(app), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return d


def _replace(section, **updates):
    updates = {k: v for k, v in updates.items() if v is not None}
    return dataclasses.replace(section, **updates) if updates else section


def _view_list(text: str | None):
    if text is None:
        return None
    return tuple(ViewId.from_name(v) for v in text.split(","))


# -- gen-data -----------------------------------------------------------------

def cmd_gen_data(args) -> int:
    app = load_config(args.config)
    app = dataclasses.replace(app, data=_replace(
        app.data, num_episodes=args.episodes, seed=args.seed,
        length=args.length))
    if args.size is not None:
        app = dataclasses.replace(
            app, render=_replace(app.render, size=args.size),
            model=_replace(app.model, image_size=args.size))
    try:
        # only the data sections matter here; model consistency is checked
        # by the commands that actually load a model
        app.dataset_config().validate()
    except ValueError as e:
        raise ConfigurationError(str(e)) from None

    if args.out:
        out = Path(args.out)
    else:
        out = _run_dir(args, app, "gen-data") / "dataset"
    cfg = app.dataset_config()
    tick = max(1, cfg.num_episodes // 10)

    def progress(done: int, total: int) -> None:
        if done % tick == 0 or done == total:
            print(f"  episode {done}/{total}", flush=True)

    manifest = build_dataset(out, cfg, progress=progress)
    counts = Counter(split for _, split in load_index(out))
    print(f"wrote {manifest['num_episodes']} episodes "
          f"({counts['train']} train / {counts['test']} test), "
          f"{manifest['length']} frames at {manifest['image_size']}px, "
          f"views {manifest['views']}")
    print(f"dataset: {out}")
    return 0


# -- train ----------------------------------------------------------------------

def _scheme_for(args, app: AppConfig) -> SchemeConfig:
    if args.scheme is None:
        return app.scheme
    name = _scheme_by_name(args.scheme)
    return SchemeConfig(
        scheme=name,
        cross_view_prob=0.0 if name is Scheme.SINGLE_VIEW
        else app.scheme.cross_view_prob,
        k_train=app.scheme.k_train, k_test=app.scheme.k_test)


def cmd_train(args) -> int:
    app = load_config(args.config)
    scheme = _scheme_for(args, app)
    train = _replace(app.train, batch_size=args.batch_size, steps=args.steps,
                     epochs=args.epochs, lr=args.lr, seed=args.seed,
                     overfit_samples=args.overfit_samples)
    model = app.model
    if args.scheme is not None and set(scheme.views) - set(model.views):
        # widen the embedding table when the flag asks for more views
        model = dataclasses.replace(model, views=scheme.views)
    app = dataclasses.replace(app, scheme=scheme, train=train, model=model)

    if args.dry_run:
        return _dry_run(app)

    if args.dataset is None:
        raise ConfigurationError("train needs --dataset (or --dry-run)")
    app.validate()
    run_dir = _run_dir(args, app, "train")
    run = TrainRunConfig(dataset=args.dataset, out_dir=str(run_dir),
                         **dataclasses.asdict(app.train))
    trainer = Trainer(run, app.scheme, app.model, resume_from=args.resume)

    total = trainer.total_steps
    t0 = time.time()
    every = max(1, args.log_every)

    def on_step(step: int, loss: float) -> None:
        if step % every == 0 or step == total:
            print(f"step {step}/{total} loss {loss:.4f} "
                  f"lr {trainer.lr_at(step - 1):.2e} "
                  f"{time.time() - t0:.0f}s", flush=True)

    final = trainer.run(on_step=on_step)
    print(f"final checkpoint: {final} ({checkpoint_hash(final)})")
    print(f"exposure: {json.dumps(trainer.exposure, sort_keys=True)}")
    return 0


def _dry_run(app: AppConfig) -> int:
    """Sample the draw distribution without touching data or weights."""
    steps = app.train.steps
    if steps is None:
        raise ConfigurationError("dry run needs --steps to size the draw")
    n = steps * app.train.batch_size
    rng = np.random.default_rng(app.train.seed)
    src, tgt = sample_view_pairs(app.scheme, rng, n)
    ks = sample_time_offsets(app.scheme, rng, src != tgt)

    print(f"dry run: {n} draws under {app.scheme.scheme.value}")
    print("pair frequencies:")
    pairs = Counter(zip(src.tolist(), tgt.tolist()))
    for (s, t), c in sorted(pairs.items()):
        print(f"  {ViewId(s).short_name}:{ViewId(t).short_name}  "
              f"{c / n:.4f}")
    print(f"time offsets: k in [{ks.min()}, {ks.max()}], "
          f"k=0 fraction {float(np.mean(ks == 0)):.4f}")
    return 0


# -- evaluation ---------------------------------------------------------------

def _open_eval_split(args):
    manifest, episodes = open_dataset(args.dataset, split=args.split)
    if not episodes:
        raise ConfigurationError(
            f"{args.dataset}: no episodes in split {args.split!r}")
    world = WorldConfig(**manifest["world"])
    render = RenderConfig(**manifest["render"])
    return manifest, episodes, world, render


def _predictor(args, ddim_steps: int):
    """Resolve exactly one frame source; its label lands in the report."""
    picked = [name for name, on in [("--checkpoint", args.checkpoint),
                                    ("--oracle", args.oracle),
                                    ("--baseline", args.baseline)] if on]
    if len(picked) != 1:
        raise ConfigurationError(
            "pick exactly one of --checkpoint PATH, --oracle or --baseline, "
            f"got {picked or 'none'}")
    if args.oracle:
        return OraclePredictor(), "oracle"
    if args.baseline == "copy-last":
        return CopyLastPredictor(), "baseline:copy-last"
    if args.baseline == "gray":
        return ConstantGrayPredictor(), "baseline:gray"
    model, schedule, _ = restore_model(args.checkpoint)
    label = checkpoint_hash(args.checkpoint)
    return DiffusionPredictor(model, schedule, steps=ddim_steps), label


def _eval_setup(args):
    app = load_config(args.config)
    ev = _replace(app.eval, horizon=args.horizon,
                  anchors_per_episode=args.anchors,
                  ddim_steps=args.ddim_steps, seed=args.seed)
    app = dataclasses.replace(app, eval=ev)
    predictor, label = _predictor(args, ev.ddim_steps)
    # a model dictates its own context length; trivial predictors get the
    # protocol default
    model = getattr(predictor, "model", None)
    protocol = EvalProtocol(
        horizon=ev.horizon, anchors_per_episode=ev.anchors_per_episode,
        n_ctx=model.cfg.context_len if model is not None else 4)
    return app, protocol, predictor, label


def _emit(run_dir: Path, text: str, records: list[dict]) -> None:
    from ..evals import reports
    print(text, end="")
    (run_dir / "report.txt").write_text(text)
    reports.write_records(run_dir / "records.jsonl", records)
    print(f"run dir: {run_dir}")


def cmd_eval_loc(args) -> int:
    app, protocol, predictor, label = _eval_setup(args)
    manifest, episodes, world, _ = _open_eval_split(args)
    rep = localization_eval(predictor, episodes, world, protocol=protocol,
                            input_views=_view_list(args.input_views),
                            seed=app.eval.seed)
    from ..evals import reports
    _emit(_run_dir(args, app, "eval-loc"),
          reports.format_localization(rep, checkpoint=label),
          reports.localization_records(rep))
    return 0


def cmd_eval_traj(args) -> int:
    app, protocol, predictor, label = _eval_setup(args)
    manifest, episodes, world, _ = _open_eval_split(args)
    if not 0 <= args.episode < len(episodes):
        raise ConfigurationError(
            f"--episode {args.episode} outside split of {len(episodes)}")
    trace = trajectory_eval(predictor, episodes[args.episode], world,
                            stride=args.stride, n_ctx=protocol.n_ctx,
                            seed=app.eval.seed)
    from ..evals import reports
    run_dir = _run_dir(args, app, "eval-traj")
    reports.plot_trajectory(trace, run_dir / "trajectory.svg",
                            image_size=manifest["image_size"])
    _emit(run_dir, reports.format_trajectory(trace, checkpoint=label),
          reports.trajectory_records(trace))
    return 0


def cmd_eval_spawn(args) -> int:
    app, protocol, predictor, label = _eval_setup(args)
    manifest, episodes, world, render = _open_eval_split(args)
    rep = spawn_eval(predictor, episodes, world, render, protocol,
                     seed=app.eval.seed)
    from ..evals import reports
    _emit(_run_dir(args, app, "eval-spawn"),
          reports.format_spawn(rep, checkpoint=label),
          reports.spawn_records(rep))
    return 0


def cmd_eval_matrix(args) -> int:
    app, protocol, predictor, label = _eval_setup(args)
    manifest, episodes, world, _ = _open_eval_split(args)
    rep = metric_matrix(predictor, episodes, protocol, seed=app.eval.seed,
                        n_resamples=args.resamples)
    from ..evals import reports
    run_dir = _run_dir(args, app, "eval-matrix")
    text = "".join(reports.format_matrix(rep, metric=m, checkpoint=label)
                   for m in ("mse", "ssim"))
    _emit(run_dir, text, reports.matrix_records(rep))
    return 0


def cmd_transfer_study(args) -> int:
    app = load_config(args.config)
    ev = _replace(app.eval, horizon=args.horizon,
                  anchors_per_episode=args.anchors,
                  ddim_steps=args.ddim_steps, seed=args.seed)
    app = dataclasses.replace(app, eval=ev)
    protocol = EvalProtocol(horizon=ev.horizon,
                            anchors_per_episode=ev.anchors_per_episode)
    manifest, episodes, world, _ = _open_eval_split(args)
    study = transfer_study(args.checkpoints, episodes, protocol,
                           ddim_steps=ev.ddim_steps, seed=ev.seed,
                           n_resamples=args.resamples)
    from ..evals import reports
    run_dir = _run_dir(args, app, "transfer-study")
    reports.plot_transfer(study, run_dir / "transfer.svg")
    _emit(run_dir, reports.format_transfer(study),
          reports.transfer_records(study))
    return 0


# -- rollout --------------------------------------------------------------------

def cmd_rollout(args) -> int:
    app = load_config(args.config)
    model, schedule, _ = restore_model(args.checkpoint)
    label = checkpoint_hash(args.checkpoint)
    manifest, episodes, world, _ = _open_eval_split(args)
    if not 0 <= args.episode < len(episodes):
        raise ConfigurationError(
            f"--episode {args.episode} outside split of {len(episodes)}")
    ep = episodes[args.episode]
    view = ViewId.from_name(args.view)
    if view not in model.cfg.views:
        raise ConfigurationError(
            f"model was not trained on view {view.short_name}")
    if view not in ep.frames:
        raise ConfigurationError(
            f"episode carries no {view.short_name} frames")
    if model.cfg.image_size != ep.size:
        raise ConfigurationError(
            f"model renders {model.cfg.image_size}px, episodes {ep.size}px")

    n_ctx = model.cfg.context_len
    t0 = args.start if args.start is not None else n_ctx - 1
    if t0 < n_ctx - 1 or t0 + args.length > ep.length - 1:
        raise ConfigurationError(
            f"rollout [{t0}, {t0 + args.length}] does not fit an episode "
            f"of {ep.length} frames with {n_ctx} context frames")

    run_dir = _run_dir(args, app, "rollout")
    rng = np.random.default_rng(args.seed)
    rows = np.array([model.cfg.view_row(view)])
    rel = np.array([1.0 / ep.fps], dtype=np.float32)
    frames = [np.array(ep.frames[view][t0 - n_ctx + 1 + j])
              for j in range(n_ctx)]
    records = []
    for i in range(1, args.length + 1):
        t = t0 + i - 1
        cum = cum_action(ep.poses, t, 1)[None]
        ctx = np.stack(frames[-n_ctx:])[None]
        pred = ddim_sample(model, schedule, ctx, rel, cum, rows, rng,
                           steps=args.ddim_steps)[0]
        frames.append(pred)
        gt = np.array(ep.frames[view][t + 1])
        m = pixel_metrics(pred, gt)
        records.append({"kind": "rollout", "step": i, "frame": t + 1,
                        **{k: round(float(v), 6) for k, v in m.items()}})
        _save_png(pred, run_dir / f"pred_{t + 1:04d}.png")

    from ..evals import reports
    _plot_rollout(ep, view, t0, frames[n_ctx:], run_dir / "rollout.svg")
    mses = [r["mse"] for r in records]
    text = (f"autoregressive rollout, view {view.short_name}, "
            f"{args.length} steps from frame {t0}\n"
            f"checkpoint: {label}\n"
            f"mse first {mses[0]:.4f}  last {mses[-1]:.4f}  "
            f"mean {float(np.mean(mses)):.4f}\n")
    _emit(run_dir, text, records)
    return 0


def _save_png(frame: np.ndarray, path: Path) -> None:
    from PIL import Image
    Image.fromarray(frame).save(path)


def _plot_rollout(ep, view: ViewId, t0: int, preds: list[np.ndarray],
                  path: Path) -> None:
    """Contact sheet: true frames above the imagined continuation."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = len(preds)
    fig, axes = plt.subplots(2, n, figsize=(1.2 * n, 2.8))
    axes = np.atleast_2d(axes)
    for i in range(n):
        axes[0, i].imshow(np.array(ep.frames[view][t0 + 1 + i]))
        axes[1, i].imshow(preds[i])
        axes[0, i].set_title(f"t={t0 + 1 + i}", fontsize=7)
        for ax in (axes[0, i], axes[1, i]):
            ax.set_xticks(())
            ax.set_yticks(())
    axes[0, 0].set_ylabel("true", fontsize=8)
    axes[1, 0].set_ylabel("imagined", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# -- serve ----------------------------------------------------------------------

def cmd_serve(args) -> int:
    app = load_config(args.config)
    serve = _replace(app.serve, host=args.host, port=args.port,
                     live_ddim_steps=args.live_steps,
                     whatif_ddim_steps=args.whatif_steps)
    app = dataclasses.replace(app, serve=serve)
    from ..service import run_server
    return run_server(args.checkpoint, app.world, app.render, app.serve,
                      seed=args.seed, fps=app.data.fps)


# -- inspect --------------------------------------------------------------------

def cmd_inspect(args) -> int:
    from ..data.dataset import MANIFEST

    p = Path(args.path)
    if p.is_dir():
        if not (p / MANIFEST).exists():
            raise FormatError(f"{p}: directory has no {MANIFEST}")
        return _inspect_dataset(p)
    if not p.is_file():
        raise FormatError(f"{p}: no such file or directory")
    head = p.open("rb").read(8)
    if head == b"XVWMCKPT":
        return _inspect_checkpoint(p)
    if head[:4] == b"XVWM":
        return _inspect_episode(p)
    if p.suffix == ".json":
        app = load_config(p)
        app.validate()
        print(json.dumps(config_dict(app), indent=2, sort_keys=True))
        print(f"config hash: {config_hash(app)}")
        return 0
    raise FormatError(f"{p}: not a checkpoint, episode, dataset or config")


def _inspect_dataset(root: Path) -> int:
    from ..data import load_manifest
    manifest = load_manifest(root)
    counts = Counter(split for _, split in load_index(root))
    order = ("format_version", "seed", "num_episodes", "test_fraction",
             "length", "fps", "image_size", "views")
    print("dataset:", root)
    for key in order:
        print(f"  {key}: {manifest[key]}")
    print(f"  split: {counts['train']} train / {counts['test']} test")
    nbytes = sum(f.stat().st_size for f in root.rglob("*") if f.is_file())
    print(f"  bytes: {nbytes}")
    return 0


def _inspect_checkpoint(path: Path) -> int:
    ck = load_checkpoint(path)
    params = sum(int(np.prod(t.shape)) for name, t in ck.tensors.items()
                 if name.startswith("param."))
    print("checkpoint:", path)
    print(f"  hash: {checkpoint_hash(path)}")
    print(f"  step: {ck.step}")
    print(f"  tensors: {len(ck.tensors)} ({params} model parameters)")
    for key in sorted(ck.config):
        print(f"  config.{key}: {ck.config[key]}")
    for key in ("scheme", "views", "exposure", "opt_t"):
        if key in ck.extra:
            print(f"  extra.{key}: {json.dumps(ck.extra[key], sort_keys=True)}")
    return 0


def _inspect_episode(path: Path) -> int:
    from ..data import read_episode
    ep = read_episode(path, mmap=True)
    print("episode:", path)
    print(f"  id: {ep.episode_id}")
    print(f"  world_seed: {ep.world_seed}")
    print(f"  sky: {ep.sky_id}")
    print(f"  frames: {ep.length} per view at {ep.size}px, {ep.fps} fps")
    print(f"  views: {[v.short_name for v in ep.views]}")
    return 0


# -- the parser -----------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH",
                   help="JSON config file; defaults apply when omitted")


def _outputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="DIR",
                   help="exact output directory (default: auto-named)")
    p.add_argument("--out-root", default="runs", metavar="DIR",
                   help="parent for auto-named run directories")


def _eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, metavar="DIR",
                   help="dataset directory from gen-data")
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--checkpoint", metavar="PATH")
    p.add_argument("--oracle", action="store_true",
                   help="score the simulator itself instead of a model")
    p.add_argument("--baseline", choices=("copy-last", "gray"),
                   help="score a trivial predictor instead of a model")
    p.add_argument("--horizon", type=int, metavar="K")
    p.add_argument("--anchors", type=int, metavar="N",
                   help="evaluation anchors per episode")
    p.add_argument("--ddim-steps", type=int, metavar="N")
    p.add_argument("--seed", type=int)
    p.add_argument("--resamples", type=int, default=1000,
                   help="bootstrap resamples for confidence intervals")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="xvwm",
        description="cross-view world model: data, training, evaluation, "
                    "serving")
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("gen-data", help="render an episode dataset")
    _common(p)
    _outputs(p)
    p.add_argument("--episodes", type=int, metavar="N")
    p.add_argument("--seed", type=int)
    p.add_argument("--length", type=int, metavar="FRAMES")
    p.add_argument("--size", type=int, metavar="PX",
                   help="frame side; also sets the model image size")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a denoiser on a dataset")
    _common(p)
    _outputs(p)
    p.add_argument("--dataset", metavar="DIR")
    p.add_argument("--scheme", metavar="NAME",
                   help="single-view, two-view or four-view")
    p.add_argument("--steps", type=int)
    p.add_argument("--epochs", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--overfit-samples", type=int, metavar="N",
                   help="freeze the first N drawn samples and train on "
                        "those only")
    p.add_argument("--resume", metavar="CKPT")
    p.add_argument("--log-every", type=int, default=100, metavar="STEPS")
    p.add_argument("--dry-run", action="store_true",
                   help="print the draw distribution and exit")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval-loc",
                       help="localization: predicted BEV marker vs true pose")
    _common(p)
    _outputs(p)
    _eval_flags(p)
    p.add_argument("--input-views", metavar="V1,V2",
                   help="restrict source views (default: all in the dataset)")
    p.set_defaults(func=cmd_eval_loc)

    p = sub.add_parser("eval-traj",
                       help="step-by-step BEV tracking over one episode")
    _common(p)
    _outputs(p)
    _eval_flags(p)
    p.add_argument("--episode", type=int, default=0,
                   help="index within the chosen split")
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_eval_traj)

    p = sub.add_parser("eval-spawn",
                       help="egocentric view generated from BEV context")
    _common(p)
    _outputs(p)
    _eval_flags(p)
    p.set_defaults(func=cmd_eval_spawn)

    p = sub.add_parser("eval-matrix",
                       help="all view pairs scored at one horizon")
    _common(p)
    _outputs(p)
    _eval_flags(p)
    p.set_defaults(func=cmd_eval_matrix)

    p = sub.add_parser("transfer-study",
                       help="ego quality vs ego exposure across checkpoints")
    _common(p)
    _outputs(p)
    p.add_argument("--checkpoints", nargs="+", required=True, metavar="CKPT")
    p.add_argument("--dataset", required=True, metavar="DIR")
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--horizon", type=int)
    p.add_argument("--anchors", type=int)
    p.add_argument("--ddim-steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--resamples", type=int, default=1000)
    p.set_defaults(func=cmd_transfer_study)

    p = sub.add_parser("rollout",
                       help="autoregressive imagination along a real "
                            "action sequence")
    _common(p)
    _outputs(p)
    p.add_argument("--checkpoint", required=True, metavar="PATH")
    p.add_argument("--dataset", required=True, metavar="DIR")
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--episode", type=int, default=0)
    p.add_argument("--view", default="ego")
    p.add_argument("--length", type=int, default=20, metavar="STEPS")
    p.add_argument("--start", type=int, metavar="FRAME")
    p.add_argument("--ddim-steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("serve", help="websocket imagination service")
    _common(p)
    p.add_argument("--checkpoint", required=True, metavar="PATH")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--live-steps", type=int, metavar="N",
                   help="DDIM steps per live frame")
    p.add_argument("--whatif-steps", type=int, metavar="N",
                   help="DDIM steps per what-if frame")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("inspect",
                       help="summarize a checkpoint, dataset, episode or "
                            "config")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except XvwmError as e:
        print(f"error.{type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
