"""Model hyperparameters."""

from __future__ import annotations

import dataclasses

from ..errors import ConfigurationError, UsageError
from ..worldsim import ViewId


@dataclasses.dataclass(frozen=True)
class ModelConfig:
    image_size: int = 64
    patch: int = 8
    dim: int = 128
    layers: int = 4
    heads: int = 4
    t_diff: int = 100
    context_len: int = 4
    views: tuple[ViewId, ...] = (ViewId.EGO, ViewId.BEV)
    beta_start: float = 1e-4
    beta_end: float = 0.07
    freq_dim: int = 64                 # sinusoidal feature width fed to the MLPs

    def validate(self) -> None:
        if self.image_size % self.patch != 0:
            raise ConfigurationError(
                f"image size {self.image_size} not divisible by patch {self.patch}")
        if self.dim % self.heads != 0:
            raise ConfigurationError(
                f"dim {self.dim} not divisible by heads {self.heads}")
        if self.t_diff < 2:
            raise ConfigurationError("need at least 2 diffusion steps")
        if self.context_len < 1:
            raise ConfigurationError("need at least 1 context frame")
        if not self.views or len(set(self.views)) != len(self.views):
            raise ConfigurationError("views must be non-empty and unique")
        if self.freq_dim % 2 != 0:
            raise ConfigurationError("freq_dim must be even")

    @property
    def tokens_per_frame(self) -> int:
        return (self.image_size // self.patch) ** 2

    @property
    def patch_dim(self) -> int:
        return self.patch * self.patch * 3

    def view_row(self, view: ViewId) -> int:
        """Index of a view in the embedding table; unknown views are refused."""
        try:
            return self.views.index(view)
        except ValueError:
            raise UsageError(
                f"view {view.short_name} not in model views "
                f"{[v.short_name for v in self.views]}") from None

    def to_json_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["views"] = [int(v) for v in self.views]
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "ModelConfig":
        kw = dict(d)
        kw["views"] = tuple(ViewId(v) for v in kw["views"])
        cfg = ModelConfig(**kw)
        cfg.validate()
        return cfg
