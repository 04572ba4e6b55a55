"""Pseudocolor overlay rendering for explanation heatmaps."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ShapeError
from ..maps import Heatmap
from ..media.frame import Frame, encode_image

# blue -> cyan -> green -> yellow -> red ramp
_ANCHORS = np.array(
    [
        [0.0, 0.0, 0.5],
        [0.0, 0.8, 1.0],
        [0.0, 0.9, 0.2],
        [1.0, 1.0, 0.0],
        [1.0, 0.1, 0.0],
    ]
)

OVERLAY_ALPHA = 0.5


def heat_palette(values: np.ndarray) -> np.ndarray:
    """Map [0,1] values to RGB via piecewise-linear anchor interpolation."""
    v = np.clip(values, 0.0, 1.0)
    pos = v * (len(_ANCHORS) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(_ANCHORS) - 1)
    f = (pos - lo)[..., None]
    return _ANCHORS[lo] * (1.0 - f) + _ANCHORS[hi] * f


def render_overlay(frame: Frame, heatmap: Heatmap, path=None) -> Frame:
    """Alpha-blend the pseudocolored heatmap over the frame.

    The blend weight is OVERLAY_ALPHA * heat value, so zero heat leaves
    pixels untouched. Writes a PNG when a path is given.
    """
    if heatmap.shape != (frame.height, frame.width):
        raise ShapeError(
            f"heatmap {heatmap.shape} does not match frame {(frame.height, frame.width)}"
        )
    px = frame.pixels
    if px.shape[2] == 1:
        px = np.repeat(px, 3, axis=2)
    color = heat_palette(heatmap.values)
    a = (OVERLAY_ALPHA * heatmap.values)[:, :, None]
    blended = Frame(np.clip(px * (1.0 - a) + color * a, 0.0, 1.0))
    if path is not None:
        encode_image(blended, Path(path))
    return blended
