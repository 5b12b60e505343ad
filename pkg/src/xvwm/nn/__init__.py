"""Tensors, reverse-mode gradients, parameter modules and AdamW."""

from .gradcheck import GradCheckReport, finite_diff_check
from .module import Embedding, Linear, Module
from .optim import AdamW
from .tensor import (Tensor, concat, embedding_lookup, grad_enabled, mse_loss,
                     no_grad, sinusoidal_features)

__all__ = [
    "AdamW", "Embedding", "GradCheckReport", "Linear", "Module", "Tensor",
    "concat", "embedding_lookup", "finite_diff_check", "grad_enabled",
    "mse_loss", "no_grad", "sinusoidal_features",
]
