"""Sensor-noise residual proxy: image minus a fixed Gaussian denoiser.

A true multi-frame camera fingerprint needs per-camera reference sets; the
single-image residual keeps the same tampering signal (local disturbance
of the noise field) and the stats suite below measures its dispersion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

from ..errors import ShapeError

DENOISER_ID = "gaussian5x5_sigma1.0"


def _gaussian_kernel5(sigma: float = 1.0) -> np.ndarray:
    ax = np.arange(5.0) - 2.0
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


_KERNEL = _gaussian_kernel5()


@dataclass
class ResidualMap:
    values: np.ndarray  # (H, W) signed residuals
    denoiser_id: str = DENOISER_ID


def noise_residual(gray: np.ndarray) -> ResidualMap:
    """Residual of the luma plane under a 5x5 Gaussian blur (reflect pad)."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2:
        raise ShapeError("noise_residual expects a grayscale (H, W) plane")
    if gray.shape[0] < 5 or gray.shape[1] < 5:
        raise ShapeError(f"frame {gray.shape} smaller than the 5x5 denoiser")
    blurred = correlate(gray, _KERNEL, mode="reflect")
    return ResidualMap(gray - blurred)


def _block_view(values: np.ndarray, block: int) -> np.ndarray:
    h, w = values.shape
    nby, nbx = h // block, w // block
    if nby == 0 or nbx == 0:
        return values.reshape(1, -1)
    v = values[: nby * block, : nbx * block]
    return v.reshape(nby, block, nbx, block).transpose(0, 2, 1, 3).reshape(nby * nbx, -1)


def residual_stats(residual: ResidualMap, block: int = 32, eps: float = 1e-12) -> np.ndarray:
    """Eight dispersion statistics of a residual map.

    [global std, mean |r|, block-std mean/std/max/min, kurtosis proxy,
    fraction of blocks with std > 2 * median block std]
    """
    r = residual.values
    g_std = float(r.std())
    mean_abs = float(np.abs(r).mean())
    blocks = _block_view(r, block)
    bstd = blocks.std(axis=1)
    kurt = float((r**4).mean() / (g_std**4 + eps))
    med = float(np.median(bstd))
    outlier_frac = float((bstd > 2.0 * med).mean())
    return np.array(
        [
            g_std,
            mean_abs,
            float(bstd.mean()),
            float(bstd.std()),
            float(bstd.max()),
            float(bstd.min()),
            kurt,
            outlier_frac,
        ]
    )
