"""One config file for the whole pipeline.

Sections: world, dataset, model, scheme, train, eval, serve. Every key must
name a known field; unknown keys abort with the full list of offenders so a
typo cannot silently fall back to a default. Views are written as short
names ("ego", "bev", "os", "front"), the scheme by its name.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..data import DatasetConfig, EpisodeConfig
from ..errors import ConfigurationError
from ..model import ModelConfig
from ..training import Scheme, SchemeConfig
from ..worldsim import RenderConfig, ViewId, WorldConfig

CONFIG_VERSION = 1


@dataclass(frozen=True)
class TrainSection:
    batch_size: int = 64
    epochs: float | None = None
    steps: int | None = None
    lr: float = 1e-4
    lr_schedule: str = "cosine"
    warmup_steps: int = 100
    weight_decay: float = 0.01
    seed: int = 0
    checkpoint_every: int = 1000
    overfit_samples: int | None = None


@dataclass(frozen=True)
class EvalSection:
    horizon: int = 20
    anchors_per_episode: int = 3
    ddim_steps: int = 20
    seed: int = 0


@dataclass(frozen=True)
class ServeSection:
    host: str = "127.0.0.1"
    port: int = 8765
    live_ddim_steps: int = 10
    whatif_ddim_steps: int = 20


@dataclass(frozen=True)
class DataSection:
    num_episodes: int = 240
    seed: int = 0
    test_fraction: float = 0.1
    length: int = 100
    fps: float = 5.0
    views: tuple[str, ...] = ("ego", "bev")


@dataclass(frozen=True)
class AppConfig:
    world: WorldConfig
    render: RenderConfig
    data: DataSection
    model: ModelConfig
    scheme: SchemeConfig
    train: TrainSection
    eval: EvalSection
    serve: ServeSection

    def dataset_config(self) -> DatasetConfig:
        return DatasetConfig(
            num_episodes=self.data.num_episodes, seed=self.data.seed,
            test_fraction=self.data.test_fraction,
            episode=EpisodeConfig(
                length=self.data.length, fps=self.data.fps,
                views=tuple(ViewId.from_name(v) for v in self.data.views),
                world=self.world, render=self.render))

    def validate(self) -> None:
        if self.model.image_size != self.render.size:
            raise ConfigurationError(
                f"model.image_size {self.model.image_size} does not match "
                f"world.render.size {self.render.size}")
        self.model.validate()
        self.scheme.validate()
        try:
            self.dataset_config().validate()
        except ValueError as e:
            raise ConfigurationError(str(e)) from None


def _build(cls, data: dict, path: str, bad: list[str], convert=None):
    """Instantiate a dataclass from a dict, recording unknown keys."""
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for k, v in data.items():
        if k not in names:
            bad.append(f"{path}.{k}")
            continue
        if convert and k in convert:
            v = convert[k](v)
        kwargs[k] = v
    return cls(**kwargs)


def _views(names) -> tuple[ViewId, ...]:
    return tuple(ViewId.from_name(n) for n in names)


def load_config(path: str | Path | None = None,
                text: str | None = None) -> AppConfig:
    """Parse a config file (or raw JSON text); both may be omitted for
    pure defaults."""
    if text is None:
        if path is None:
            raw = {}
        else:
            p = Path(path)
            if not p.exists():
                raise ConfigurationError(f"config file {p} does not exist")
            text = p.read_text()
    if text is not None:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config is not valid JSON: {e}") from None
        if not isinstance(raw, dict):
            raise ConfigurationError("config root must be a JSON object")

    bad: list[str] = []
    known = {"version", "world", "dataset", "model", "scheme", "train",
             "eval", "serve"}
    for k in raw:
        if k not in known:
            bad.append(k)

    version = raw.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigurationError(
            f"config version {version} unsupported; this build reads "
            f"version {CONFIG_VERSION}")

    world_raw = dict(raw.get("world", {}))
    render_raw = world_raw.pop("render", {})
    world = _build(WorldConfig, world_raw, "world", bad)
    render = _build(RenderConfig, render_raw, "world.render", bad)
    data = _build(DataSection, raw.get("dataset", {}), "dataset", bad,
                  convert={"views": tuple})
    model = _build(ModelConfig, raw.get("model", {}), "model", bad,
                   convert={"views": _views})
    scheme_raw = raw.get("scheme", {})
    scheme = _build(SchemeConfig, scheme_raw, "scheme", bad,
                    convert={"scheme": _scheme_by_name, "views": _views})
    if scheme.scheme is Scheme.SINGLE_VIEW and \
            "cross_view_prob" not in scheme_raw:
        # the cross-view default only makes sense with > 1 view
        scheme = dataclasses.replace(scheme, cross_view_prob=0.0)
    train = _build(TrainSection, raw.get("train", {}), "train", bad)
    ev = _build(EvalSection, raw.get("eval", {}), "eval", bad)
    serve = _build(ServeSection, raw.get("serve", {}), "serve", bad)

    if bad:
        raise ConfigurationError(
            "unknown config keys: " + ", ".join(sorted(bad)))
    return AppConfig(world=world, render=render, data=data, model=model,
                     scheme=scheme, train=train, eval=ev, serve=serve)


def _scheme_by_name(name: str) -> Scheme:
    try:
        return Scheme(str(name).strip().lower().replace("-", "_"))
    except ValueError:
        raise ConfigurationError(
            f"unknown scheme {name!r}; expected one of "
            f"{[s.value for s in Scheme]}") from None


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, ViewId):
        return obj.short_name
    if isinstance(obj, Scheme):
        return obj.value
    if isinstance(obj, (tuple, list)):
        return [_plain(x) for x in obj]
    return obj


def config_dict(app: AppConfig) -> dict:
    """The resolved configuration in the same shape the loader reads."""
    return {
        "version": CONFIG_VERSION,
        "world": {**_plain(app.world), "render": _plain(app.render)},
        "dataset": _plain(app.data),
        "model": _plain(app.model),
        "scheme": _plain(app.scheme),
        "train": _plain(app.train),
        "eval": _plain(app.eval),
        "serve": _plain(app.serve),
    }


def config_hash(app: AppConfig) -> str:
    """Ten hex chars naming this exact configuration."""
    blob = json.dumps(config_dict(app), sort_keys=True,
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:10]
