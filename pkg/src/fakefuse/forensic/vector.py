"""The 83-dim forensic descriptor and the forensic heatmap."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter

from ..maps import Heatmap, minmax_heatmap
from ..media.frame import Frame, to_gray
from .blockiness import blockiness_map, jpeg_feature_vector
from .residual import noise_residual, residual_stats
from .spectral import N_RADIAL_BINS, dct2_full, radial_profile

FORENSIC_DIM = 8 + 8 + N_RADIAL_BINS + 3

FEATURE_NAMES = (
    [
        "residual_std",
        "residual_mean_abs",
        "residual_block_std_mean",
        "residual_block_std_std",
        "residual_block_std_max",
        "residual_block_std_min",
        "residual_kurtosis_proxy",
        "residual_outlier_block_frac",
    ]
    + [
        "jpeg_blockiness",
        "jpeg_blockiness_best_offset",
        "jpeg_offset_contrast",
        "jpeg_step_01",
        "jpeg_step_10",
        "jpeg_step_11",
        "jpeg_near_zero_ac_frac",
        "jpeg_ac_variance",
    ]
    + [f"radial_bin_{i:02d}" for i in range(N_RADIAL_BINS)]
    + ["band_low", "band_mid", "band_high"]
)

assert len(FEATURE_NAMES) == FORENSIC_DIM


def forensic_vector(frame: Frame) -> np.ndarray:
    """Residual stats (8) + compression traces (8) + radial bins (64) + bands (3)."""
    gray = to_gray(frame)
    res = noise_residual(gray)
    spec = radial_profile(dct2_full(gray))
    return np.concatenate(
        [
            residual_stats(res),
            jpeg_feature_vector(gray),
            spec.radial_bins,
            spec.band_ratios,
        ]
    )


def forensic_heatmap(frame: Frame) -> Heatmap:
    """Pixel map of suspicious regions from residual energy + blockiness deviation.

    Residual energy is box-filtered over 16x16; block scores become a
    per-pixel deviation from their median; the min-max normalized sum is
    returned (flagged all-zeros when flat).
    """
    gray = to_gray(frame)
    res = noise_residual(gray)
    energy = uniform_filter(res.values**2, size=16, mode="reflect")

    bmap = blockiness_map(gray)
    dev = np.abs(bmap.scores - np.median(bmap.scores))
    up = np.kron(dev, np.ones((8, 8)))
    h, w = gray.shape
    if up.shape != (h, w):  # pad the non-multiple-of-8 margin by edge values
        up = np.pad(up, ((0, h - up.shape[0]), (0, w - up.shape[1])), mode="edge")
    return minmax_heatmap(energy + up, source="forensic")
