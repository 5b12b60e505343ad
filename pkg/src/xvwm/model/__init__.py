"""Cross-view diffusion world model: network, schedule, sampler, checkpoints."""

from .checkpoint import (Checkpoint, checkpoint_hash, load_checkpoint,
                         load_model_tensors, model_tensors, restore_model,
                         save_checkpoint)
from .config import ModelConfig
from .losses import collate, training_loss
from .network import CDiTBlock, ConditioningEmbedder, Denoiser, Mlp
from .patches import (patchify_raw, pos_embed_2d, to_model_scale, to_u8,
                      unpatchify_raw)
from .sampler import ddim_sample, ddim_timesteps
from .schedule import NoiseSchedule

__all__ = [
    "Checkpoint", "checkpoint_hash", "load_checkpoint",
    "load_model_tensors", "model_tensors",
    "restore_model", "save_checkpoint", "ModelConfig", "collate",
    "training_loss", "CDiTBlock",
    "ConditioningEmbedder", "Denoiser", "Mlp", "patchify_raw", "pos_embed_2d",
    "to_model_scale", "to_u8", "unpatchify_raw", "ddim_sample",
    "ddim_timesteps", "NoiseSchedule",
]
