"""Dataset assembly: many episodes, an index, and a manifest.

Every episode lives in its own arena with its own sky. The train/test
split is a seeded permutation of episode ids, so the same (seed, count)
always yields the same membership no matter when files were written.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Callable

import numpy as np

from ..errors import FormatError
from ..worldsim import ViewId
from .episode import Episode, EpisodeConfig, generate_episode
from .io import episode_path, read_episode, write_episode

DATASET_SALT = 0x44534554
SPLIT_SALT = 0x53504C54
MANIFEST = "dataset.json"
INDEX = "index.txt"


@dataclasses.dataclass(frozen=True)
class DatasetConfig:
    num_episodes: int = 240
    seed: int = 0
    test_fraction: float = 0.1
    episode: EpisodeConfig = dataclasses.field(default_factory=EpisodeConfig)

    def validate(self) -> None:
        if self.num_episodes < 2:
            raise ValueError("need at least 2 episodes to split")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0,1)")
        self.episode.validate()


def world_seed_for(dataset_seed: int, episode_id: int) -> int:
    ss = np.random.SeedSequence([DATASET_SALT, dataset_seed, episode_id])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def make_split(episode_ids: list[int], seed: int,
               test_fraction: float = 0.1) -> dict[int, str]:
    """Deterministic train/test assignment; at least one test episode."""
    ids = sorted(episode_ids)
    rng = np.random.default_rng(np.random.SeedSequence([SPLIT_SALT, seed]))
    perm = rng.permutation(len(ids))
    n_test = max(1, round(len(ids) * test_fraction))
    test = {ids[i] for i in perm[:n_test]}
    return {i: ("test" if i in test else "train") for i in ids}


def build_dataset(root: str | Path, config: DatasetConfig = DatasetConfig(),
                  progress: Callable[[int, int], None] | None = None) -> dict:
    """Generate, write and index all episodes; returns the manifest."""
    config.validate()
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)

    ids = list(range(config.num_episodes))
    split = make_split(ids, config.seed, config.test_fraction)

    for n, eid in enumerate(ids):
        ep = generate_episode(eid, world_seed_for(config.seed, eid), config.episode)
        write_episode(ep, episode_path(root, eid))
        if progress is not None:
            progress(n + 1, len(ids))

    with open(root / INDEX, "w") as f:
        for eid in ids:
            f.write(f"{episode_path(root, eid).name} {split[eid]}\n")

    manifest = {
        "format_version": 1,
        "seed": config.seed,
        "num_episodes": config.num_episodes,
        "test_fraction": config.test_fraction,
        "length": config.episode.length,
        "fps": config.episode.fps,
        "image_size": config.episode.render.size,
        "views": [v.short_name for v in config.episode.views],
        "world": dataclasses.asdict(config.episode.world),
        "render": dataclasses.asdict(config.episode.render),
        "splits": {
            "train": sum(1 for s in split.values() if s == "train"),
            "test": sum(1 for s in split.values() if s == "test"),
        },
    }
    with open(root / MANIFEST, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def load_manifest(root: str | Path) -> dict:
    p = Path(root) / MANIFEST
    if not p.exists():
        raise FormatError(f"no {MANIFEST} under {root}")
    with open(p) as f:
        return json.load(f)


def load_index(root: str | Path) -> list[tuple[str, str]]:
    p = Path(root) / INDEX
    if not p.exists():
        raise FormatError(f"no {INDEX} under {root}")
    out = []
    for ln, line in enumerate(p.read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in ("train", "test"):
            raise FormatError(f"{p}:{ln}: expected '<file> train|test'")
        out.append((parts[0], parts[1]))
    return out


def open_dataset(root: str | Path, split: str | None = None,
                 mmap: bool = True) -> tuple[dict, list[Episode]]:
    """Load the manifest and the episodes of one split (or all of them).

    Frames arrive memory mapped by default; a full desk dataset outweighs
    RAM, and samples only touch a few frames per episode.
    """
    root = Path(root)
    manifest = load_manifest(root)
    episodes = []
    for fname, s in load_index(root):
        if split is not None and s != split:
            continue
        episodes.append(read_episode(root / "episodes" / fname, mmap=mmap))
    return manifest, episodes
