"""Learned feature extractors: toy CNN and patch transformer."""

from .cnn import CnnConfig, cnn_embed, cnn_forward, init_cnn_params
from .vit import (
    VitConfig,
    init_vit_params,
    multihead_attention,
    patchify,
    unpatchify,
    vit_embed,
    vit_forward,
)

__all__ = [
    "CnnConfig",
    "VitConfig",
    "init_cnn_params",
    "init_vit_params",
    "cnn_forward",
    "cnn_embed",
    "vit_forward",
    "vit_embed",
    "multihead_attention",
    "patchify",
    "unpatchify",
]
