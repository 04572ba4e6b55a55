"""Explainability: Grad-CAM, heatmap fusion, IoU alignment, overlays."""

from ..maps import Heatmap, minmax_heatmap
from .alignment import (
    DEFAULT_IOU_CUTOFF,
    DEFAULT_TOP_FRACTION,
    AlignmentReport,
    AlignmentSample,
    alignment_rate,
    fuse_heatmaps,
    iou,
    threshold_top_fraction,
)
from .gradcam import grad_cam
from .overlay import OVERLAY_ALPHA, heat_palette, render_overlay

__all__ = [
    "Heatmap",
    "minmax_heatmap",
    "grad_cam",
    "fuse_heatmaps",
    "threshold_top_fraction",
    "iou",
    "alignment_rate",
    "AlignmentSample",
    "AlignmentReport",
    "render_overlay",
    "heat_palette",
    "OVERLAY_ALPHA",
    "DEFAULT_TOP_FRACTION",
    "DEFAULT_IOU_CUTOFF",
]
