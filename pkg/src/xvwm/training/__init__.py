"""Training schemes, sampling laws, and the seeded training loop."""

from .schemes import (Scheme, SchemeConfig, sample_time_offset,
                      sample_time_offsets, sample_view_pair,
                      sample_view_pairs)
from .trainer import Trainer, TrainRunConfig

__all__ = [
    "Scheme", "SchemeConfig", "sample_time_offset", "sample_time_offsets",
    "sample_view_pair", "sample_view_pairs", "Trainer", "TrainRunConfig",
]
