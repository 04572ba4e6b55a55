"""Block-grid compression traces: boundary blockiness and quantization steps.

Blockiness compares absolute pixel differences across 8-aligned block
boundaries with differences at interior positions; a compressed image
shows an excess at the boundaries of its (possibly shifted) grid.
Quantization steps are recovered from the comb structure of block-DCT
coefficient histograms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from .spectral import block_dct_coeffs


@dataclass
class BlockinessMap:
    scores: np.ndarray  # per 8x8 block, boundary-vs-interior statistic
    grid_offset: tuple  # (dx, dy) maximizing the global statistic
    global_score: float = 0.0


def _axis_diff_stats(gray: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-offset boundary mean |diff| and boundary-minus-interior statistic.

    Returns (abs_mean[8], excess[8]) for boundaries at positions where
    (j + 1 - offset) % 8 == 0 along the given axis.
    """
    d = np.abs(np.diff(gray, axis=axis))
    col_mean = d.mean(axis=1 - axis)  # mean |diff| per boundary position
    n = col_mean.size
    j = np.arange(n)
    abs_mean = np.zeros(8)
    excess = np.zeros(8)
    total = col_mean.sum()
    for off in range(8):
        sel = (j + 1 - off) % 8 == 0
        k = int(sel.sum())
        if k == 0 or k == n:
            continue
        b = col_mean[sel].sum() / k
        i = (total - col_mean[sel].sum()) / (n - k)
        abs_mean[off] = b
        excess[off] = b - i
    return abs_mean, excess


def blockiness_profile(gray: np.ndarray) -> dict:
    """Offset-resolved blockiness statistics for one grayscale plane."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.shape[0] < 16 or gray.shape[1] < 16:
        raise ShapeError("blockiness needs at least a 16x16 plane")
    habs, hexc = _axis_diff_stats(gray, axis=1)  # vertical boundaries, offset dx
    vabs, vexc = _axis_diff_stats(gray, axis=0)  # horizontal boundaries, offset dy
    excess = 0.5 * (hexc[:, None] + vexc[None, :])  # [dx, dy]
    absmean = 0.5 * (habs[:, None] + vabs[None, :])
    best = np.unravel_index(np.argmax(excess), excess.shape)
    return {
        "global": float(excess[0, 0]),
        "best_offset": (int(best[0]), int(best[1])),
        "best_excess": float(excess[best]),
        "offset_abs_mean": absmean,
    }


def blockiness_map(gray: np.ndarray) -> BlockinessMap:
    """Per-block local blockiness over 3-block neighborhoods plus the global score."""
    prof = blockiness_profile(gray)
    gray = np.asarray(gray, dtype=np.float64)
    h, w = gray.shape
    nby, nbx = h // 8, w // 8
    dh = np.abs(np.diff(gray, axis=1))
    dv = np.abs(np.diff(gray, axis=0))
    jh = np.arange(dh.shape[1])
    jv = np.arange(dv.shape[0])
    hb = (jh + 1) % 8 == 0
    vb = (jv + 1) % 8 == 0
    scores = np.zeros((nby, nbx))
    for by in range(nby):
        r0, r1 = max(0, (by - 1) * 8), min(h, (by + 2) * 8)
        for bx in range(nbx):
            c0, c1 = max(0, (bx - 1) * 8), min(w, (bx + 2) * 8)
            wh = dh[r0:r1, c0 : c1 - 1]
            wv = dv[r0 : r1 - 1, c0:c1]
            mh = hb[c0 : c1 - 1]
            mv = vb[r0 : r1 - 1]
            parts = []
            if mh.any() and (~mh).any():
                parts.append(wh[:, mh].mean() - wh[:, ~mh].mean())
            if mv.any() and (~mv).any():
                parts.append(wv[mv, :].mean() - wv[~mv, :].mean())
            scores[by, bx] = float(np.mean(parts)) if parts else 0.0
    return BlockinessMap(scores, prof["best_offset"], prof["global"])


def estimate_quant_step(
    coeffs: np.ndarray, max_step: int = 32, min_votes: int = 4, threshold: float = 0.35
) -> int:
    """Largest step whose multiples attract the nonzero coefficient mass.

    Hits are counted within a small tolerance band around each multiple and
    normalized against the chance hit rate, so the comb remains detectable
    under modest pixel noise (which shifts coefficients off their exact
    quantized values).
    """
    rounded = np.rint(coeffs).astype(np.int64)
    nz = np.abs(rounded[rounded != 0])
    if nz.size < min_votes:
        return max_step
    best = 1
    for q in range(2, max_step + 1):
        tol = max(1, q // 6) if q >= 4 else 0
        d = nz % q
        d = np.minimum(d, q - d)
        hit = float((d <= tol).mean())
        chance = min(1.0, (2 * tol + 1) / q)
        if chance >= 1.0:
            continue
        score = (hit - chance) / (1.0 - chance)
        if score >= threshold:
            best = q
    return best


def jpeg_feature_vector(gray: np.ndarray) -> np.ndarray:
    """Eight compression-trace features of a grayscale plane.

    [global blockiness, blockiness at best offset, offset contrast,
    quant step (0,1), (1,0), (1,1), near-zero AC fraction, AC variance]
    """
    prof = blockiness_profile(gray)
    absmean = prof["offset_abs_mean"]
    mean_all = float(absmean.mean())
    contrast = float(absmean.max() / mean_all) if mean_all > 0 else 1.0

    coeffs = block_dct_coeffs(gray)  # (nby, nbx, 8, 8) on the 0..255 scale
    steps = [
        estimate_quant_step(coeffs[:, :, u, v].ravel())
        for u, v in ((0, 1), (1, 0), (1, 1))
    ]
    ac = coeffs.reshape(-1, 64)[:, 1:]
    near_zero = float((np.abs(ac) < 0.5).mean())
    ac_var = float(ac.var())
    return np.array(
        [
            prof["global"],
            prof["best_excess"],
            contrast,
            float(steps[0]),
            float(steps[1]),
            float(steps[2]),
            near_zero,
            ac_var,
        ]
    )
