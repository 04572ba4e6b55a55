"""Fusion model, stratified splits, augmentation and training."""

from .augment import AugmentToggles, augment, hflip
from .model import AblationMask, FusionModel, Standardization, clip_score, fuse
from .split import SplitAssignment, stratified_split
from .train import (
    CSV_HEADER,
    EpochRow,
    TrainConfig,
    TrainResult,
    evaluate_split,
    sample_features,
    train,
    write_metrics_csv,
)

__all__ = [
    "AblationMask",
    "FusionModel",
    "Standardization",
    "fuse",
    "clip_score",
    "stratified_split",
    "SplitAssignment",
    "AugmentToggles",
    "augment",
    "hflip",
    "TrainConfig",
    "TrainResult",
    "EpochRow",
    "train",
    "evaluate_split",
    "sample_features",
    "write_metrics_csv",
    "CSV_HEADER",
]
