"""Episode generation, on-disk format and training sample assembly."""

from .episode import Episode, EpisodeConfig, generate_episode, replay_poses
from .io import episode_path, read_episode, write_episode
from .dataset import (DatasetConfig, build_dataset, load_index, load_manifest,
                      make_split, open_dataset)
from .samples import TrainingSample, cum_action, compose_actions, make_sample

__all__ = [
    "DatasetConfig", "Episode", "EpisodeConfig", "TrainingSample",
    "build_dataset", "compose_actions", "cum_action", "episode_path",
    "generate_episode", "load_index", "load_manifest", "make_sample",
    "make_split", "open_dataset", "read_episode", "replay_poses",
    "write_episode",
]
