"""Heatmap container shared by the forensic and explainability layers.

Ground-truth manipulation masks are plain (H, W) boolean arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Heatmap:
    """(H, W) map in [0, 1]; ``flat`` marks degenerate all-equal inputs."""

    values: np.ndarray
    source: str = "forensic"  # grad_cam | forensic | fused
    flat: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("heatmap must be 2-d")
        self.values = v

    @property
    def shape(self):
        return self.values.shape


def minmax_heatmap(raw: np.ndarray, source: str) -> Heatmap:
    """Min-max normalize to [0, 1]; all-equal inputs become flagged zeros."""
    raw = np.asarray(raw, dtype=np.float64)
    lo = raw.min()
    hi = raw.max()
    if hi - lo < 1e-12:
        return Heatmap(np.zeros_like(raw), source=source, flat=True)
    return Heatmap((raw - lo) / (hi - lo), source=source, flat=False)
