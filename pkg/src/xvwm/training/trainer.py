"""Seeded, resumable training loop.

One RNG stream drives everything random in a fixed per-step order (view
pairs, offsets, episode picks, frame anchors, diffusion steps, noise), and
its bit-generator state rides along in every checkpoint, so a resumed run
replays the exact sample sequence an uninterrupted run would have seen.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data import make_sample, open_dataset
from ..errors import ConfigurationError, TrainingAborted
from ..model import (Checkpoint, Denoiser, ModelConfig, NoiseSchedule,
                     collate, load_checkpoint, load_model_tensors,
                     model_tensors, save_checkpoint, training_loss)
from ..nn import AdamW
from ..worldsim import ViewId
from .schemes import SchemeConfig, sample_time_offsets, sample_view_pairs

INIT_SALT = 0x544E4954
DRAW_SALT = 0x54445257

METRICS = "metrics.jsonl"
LAST = "last.ckpt"


@dataclass
class TrainRunConfig:
    dataset: str
    out_dir: str
    batch_size: int = 64
    epochs: float | None = None        # passes over the train frame pool
    steps: int | None = None           # explicit step count; wins over epochs
    lr: float = 1e-4
    lr_schedule: str = "cosine"
    warmup_steps: int = 100
    weight_decay: float = 0.01
    seed: int = 0
    checkpoint_every: int = 1000
    overfit_samples: int | None = None

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be positive")
        if (self.epochs is None) == (self.steps is None):
            raise ConfigurationError("set exactly one of epochs or steps")
        if self.steps is not None and self.steps < 1:
            raise ConfigurationError("steps must be positive")
        if self.epochs is not None and self.epochs <= 0:
            raise ConfigurationError("epochs must be positive")
        if self.lr_schedule not in ("cosine", "constant"):
            raise ConfigurationError(
                f"unknown lr schedule {self.lr_schedule!r}")
        if self.overfit_samples is not None and self.overfit_samples < 1:
            raise ConfigurationError("overfit_samples must be positive")


def _pair_key(src: ViewId, tgt: ViewId) -> str:
    return f"{src.short_name}:{tgt.short_name}"


class Trainer:
    def __init__(self, run: TrainRunConfig, scheme: SchemeConfig,
                 model_cfg: ModelConfig, resume_from: str | None = None):
        run.validate()
        scheme.validate()
        model_cfg.validate()
        for v in scheme.views:
            if v not in model_cfg.views:
                raise ConfigurationError(
                    f"scheme view {v.short_name} missing from model views "
                    f"{[m.short_name for m in model_cfg.views]}")

        self.run_cfg = run
        self.scheme = scheme
        self.model_cfg = model_cfg
        self.out_dir = Path(run.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

        self.manifest, self.episodes = open_dataset(run.dataset, split="train")
        if not self.episodes:
            raise ConfigurationError(f"{run.dataset}: empty train split")
        have = set(self.episodes[0].views)
        missing = [v.short_name for v in scheme.views if v not in have]
        if missing:
            raise ConfigurationError(
                f"dataset lacks views {missing} required by the scheme")
        self.ep_len = self.episodes[0].actions.shape[0]
        n_ctx = model_cfg.context_len
        if self.ep_len < scheme.k_train + n_ctx:
            raise ConfigurationError(
                f"episodes of {self.ep_len} frames cannot host horizon "
                f"{scheme.k_train} with {n_ctx} context frames")

        self.model = Denoiser(
            model_cfg, np.random.default_rng(
                np.random.SeedSequence([INIT_SALT, run.seed])))
        self.schedule = NoiseSchedule(model_cfg.t_diff, model_cfg.beta_start,
                                      model_cfg.beta_end)
        self.opt = AdamW(self.model.named_parameters(), lr=run.lr,
                         weight_decay=run.weight_decay)
        self.rng = np.random.default_rng(
            np.random.SeedSequence([DRAW_SALT, run.seed]))
        self.step = 0
        self.exposure = {_pair_key(s, t): 0
                         for s in scheme.views for t in scheme.views}
        self._fixed = None
        if run.overfit_samples is not None:
            self._fixed = self._draw_samples(run.overfit_samples)[0]
        if resume_from is not None:
            self._resume(resume_from)

    @property
    def fixed_samples(self):
        """The frozen sample pool when overfitting, else None."""
        return None if self._fixed is None else tuple(self._fixed)

    # -- step budget ---------------------------------------------------------
    @property
    def total_steps(self) -> int:
        if self.run_cfg.steps is not None:
            return self.run_cfg.steps
        pool = len(self.episodes) * self.ep_len
        per_epoch = max(1, math.ceil(pool / self.run_cfg.batch_size))
        return max(1, round(self.run_cfg.epochs * per_epoch))

    def lr_at(self, step: int) -> float:
        run = self.run_cfg
        warm = min(run.warmup_steps, self.total_steps)
        if warm and step < warm:
            return run.lr * (step + 1) / warm
        if run.lr_schedule == "constant" or self.total_steps <= warm:
            return run.lr
        frac = (step - warm) / max(1, self.total_steps - warm)
        floor = run.lr / 30.0
        return floor + 0.5 * (run.lr - floor) * (1 + math.cos(math.pi * frac))

    # -- sampling ------------------------------------------------------------
    def _draw_samples(self, n: int):
        src, tgt = sample_view_pairs(self.scheme, self.rng, n)
        ks = sample_time_offsets(self.scheme, self.rng, src != tgt)
        eps = self.rng.integers(len(self.episodes), size=n)
        n_ctx = self.model_cfg.context_len
        lo = np.maximum(n_ctx - 1, -ks)
        hi = self.ep_len - 1 - np.maximum(ks, 0)
        ts = self.rng.integers(lo, hi + 1)
        samples = [make_sample(self.episodes[e], int(t), int(k),
                               ViewId(int(s)), ViewId(int(v)), n_ctx)
                   for e, t, k, s, v in zip(eps, ts, ks, src, tgt)]
        return samples, list(zip(src.tolist(), tgt.tolist()))

    def draw_batch(self):
        b = self.run_cfg.batch_size
        if self._fixed is not None:
            idx = np.arange(b) % len(self._fixed)
            samples = [self._fixed[i] for i in idx]
        else:
            samples, _ = self._draw_samples(b)
        for s in samples:
            self.exposure[_pair_key(s.src_view, s.tgt_view)] += 1
        return samples

    # -- the loop ------------------------------------------------------------
    def train_step(self) -> float:
        samples = self.draw_batch()
        batch = collate(samples, self.model_cfg)
        self.opt.zero_grad()
        loss = training_loss(self.model, self.schedule, batch, self.rng)
        value = float(loss.data)
        if not math.isfinite(value):
            dump = self.out_dir / f"abort_step{self.step}.json"
            dump.write_text(json.dumps(
                {"step": self.step, "loss": value,
                 "batch": batch["descriptor"]}, indent=2))
            raise TrainingAborted(
                f"non-finite loss {value} at step {self.step}; "
                f"batch descriptor dumped to {dump}",
                batch_descriptor=batch["descriptor"])
        loss.backward()
        self.opt.step(lr=self.lr_at(self.step))
        self.step += 1
        return value

    def run(self, on_step=None) -> Path:
        t0 = time.time()
        with open(self.out_dir / METRICS, "a") as log:
            while self.step < self.total_steps:
                value = self.train_step()
                log.write(json.dumps(
                    {"step": self.step, "loss": round(value, 6),
                     "lr": self.lr_at(self.step - 1),
                     "time": round(time.time() - t0, 3),
                     "exposure": self.exposure}) + "\n")
                if on_step is not None:
                    on_step(self.step, value)
                if self.step % self.run_cfg.checkpoint_every == 0 \
                        and self.step < self.total_steps:
                    self.save(self.out_dir / f"step{self.step:07d}.ckpt")
        final = self.out_dir / LAST
        self.save(final)
        return final

    # -- checkpoint plumbing ---------------------------------------------------
    def save(self, path) -> None:
        tensors = model_tensors(self.model)
        tensors.update({f"opt.{k}": v
                        for k, v in self.opt.state_arrays().items()})
        extra = {
            "rng": self.rng.bit_generator.state,
            "exposure": self.exposure,
            "opt_t": self.opt.t,
            "scheme": self.scheme.scheme.value,
            "views": [int(v) for v in self.scheme.views],
        }
        save_checkpoint(path, Checkpoint(
            config=self.model_cfg.to_json_dict(), step=self.step,
            tensors=tensors, extra=extra))

    def _resume(self, path: str) -> None:
        ck = load_checkpoint(path,
                             expect_config=self.model_cfg.to_json_dict())
        load_model_tensors(self.model, ck.tensors)
        opt_state = {k[len("opt."):]: v for k, v in ck.tensors.items()
                     if k.startswith("opt.")}
        self.opt.load_state_arrays(opt_state, t=int(ck.extra["opt_t"]))
        self.rng.bit_generator.state = ck.extra["rng"]
        self.exposure = {k: int(v) for k, v in ck.extra["exposure"].items()}
        self.step = ck.step
