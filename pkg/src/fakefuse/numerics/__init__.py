"""Tensor math, autodiff, optimizer and schedule."""

from . import ops
from .checkpoint import load_checkpoint, save_checkpoint
from .optim import AdamState, CosineSchedule, adam_step, clip_global_norm, cosine_lr, init_adam
from .tensor import GRAD_LOCK, Tape, Tensor, as_tensor, backward, default_tape, no_grad

__all__ = [
    "ops",
    "Tensor",
    "Tape",
    "as_tensor",
    "backward",
    "default_tape",
    "no_grad",
    "GRAD_LOCK",
    "AdamState",
    "CosineSchedule",
    "adam_step",
    "clip_global_norm",
    "cosine_lr",
    "init_adam",
    "save_checkpoint",
    "load_checkpoint",
]
