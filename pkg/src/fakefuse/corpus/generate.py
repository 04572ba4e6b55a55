"""Deterministic synthetic corpus: procedural portraits, spliced fakes with a
mismatched compression history (seen family), and locally smoothed fakes
(held-out family). Every sample is a pure function of (config, index).

The planted forensic signal is the donor's different quality factor; the
planted visual signal is the donor palette, which is camouflaged on half of
the spliced fakes so neither cue alone separates the corpus perfectly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from ..errors import ParameterError
from ..media.frame import Frame
from ..media.jpeg import JpegConfig, jpeg_round_trip


@dataclass
class CorpusConfig:
    n_real: int = 50
    n_spliced: int = 50
    n_smooth: int = 0
    image_size: int = 224
    qf_authentic: int = 75
    qf_donor: int = 40
    feather_px: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.qf_donor == self.qf_authentic:
            raise ParameterError("donor QF must differ from authentic QF")
        for name, n in (("n_real", self.n_real), ("n_spliced", self.n_spliced)):
            if n < 10:
                raise ParameterError(f"{name} must be >= 10, got {n}")
        if self.n_smooth and self.n_smooth < 10:
            raise ParameterError("n_smooth must be 0 or >= 10")


@dataclass
class CorpusSample:
    frame: Frame
    label: str  # real | fake
    mask: np.ndarray  # (H, W) bool, manipulated pixels
    family: str = "none"  # none | splice | smooth
    provenance: dict = field(default_factory=dict)
    has_mask: bool = True

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.label not in ("real", "fake"):
            raise ParameterError(f"label must be real|fake, got {self.label!r}")
        if self.label == "real" and self.mask.any():
            raise ParameterError("real samples must have empty masks")
        if self.label == "fake" and self.has_mask and not self.mask.any():
            raise ParameterError("fake samples must have nonempty masks")

    @property
    def y(self) -> int:
        return 1 if self.label == "fake" else 0


def _ellipse_rho(size: int, cy: float, cx: float, ry: float, rx: float) -> np.ndarray:
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    return np.sqrt(((y - cy) / ry) ** 2 + ((x - cx) / rx) ** 2)


def _feather_alpha(rho: np.ndarray, radius: float, feather: float) -> np.ndarray:
    """1 inside the ellipse, 0 outside, linear ramp of ~feather px at the rim."""
    band = max(feather, 1e-6) / max(radius, 1e-6)
    return np.clip((1.0 + band / 2.0 - rho) / band, 0.0, 1.0)


def _paint_scene(
    rng: np.random.Generator,
    size: int,
    texture_sigma: float | None = None,
    texture_amp: float | None = None,
) -> tuple[np.ndarray, tuple]:
    """Background gradient + band-limited texture + an elliptical face."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64) / max(size - 1, 1)
    c0 = rng.uniform(0.25, 0.75, size=3)
    c1 = rng.uniform(0.25, 0.75, size=3)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    t = (np.cos(angle) * x + np.sin(angle) * y + 1.0) / 2.0
    img = c0[None, None, :] * (1.0 - t[:, :, None]) + c1[None, None, :] * t[:, :, None]

    texture_sigma = rng.uniform(1.0, 1.5) if texture_sigma is None else texture_sigma
    texture_amp = rng.uniform(0.02, 0.05) if texture_amp is None else texture_amp
    texture = gaussian_filter(rng.standard_normal((size, size)), sigma=texture_sigma)
    texture /= max(texture.std(), 1e-9)
    img += texture_amp * texture[:, :, None]

    cy = size * rng.uniform(0.45, 0.55)
    cx = size * rng.uniform(0.45, 0.55)
    ry = size * rng.uniform(0.28, 0.36)
    rx = ry * rng.uniform(0.75, 0.9)
    skin = rng.uniform(0.55, 0.8) * np.array([1.0, 0.86, 0.72]) + rng.uniform(-0.04, 0.04, 3)
    alpha = _feather_alpha(_ellipse_rho(size, cy, cx, ry, rx), ry, 2.0)[:, :, None]
    face = np.clip(skin, 0.05, 0.95)[None, None, :] + 0.03 * texture[:, :, None]
    img = img * (1.0 - alpha) + face * alpha

    def dab(dy, dx, r_y, r_x, color, feather=1.5):
        nonlocal img
        rho = _ellipse_rho(size, cy + dy, cx + dx, r_y, r_x)
        a = _feather_alpha(rho, r_y, feather)[:, :, None]
        img = img * (1.0 - a) + np.asarray(color)[None, None, :] * a

    eye_dy = -0.3 * ry
    eye_dx = 0.38 * rx
    eye_r = max(2.0, 0.09 * ry)
    dark = rng.uniform(0.05, 0.2, size=3)
    dab(eye_dy, -eye_dx, eye_r, eye_r * 1.4, dark)
    dab(eye_dy, eye_dx, eye_r, eye_r * 1.4, dark)
    dab(0.45 * ry, 0.0, max(2.0, 0.07 * ry), 0.32 * rx, dark * rng.uniform(1.0, 2.0))
    dab(0.1 * ry, 0.0, 0.18 * ry, max(2.0, 0.05 * rx), skin * 0.9)  # nose shading
    return np.clip(img, 0.0, 1.0), (cy, cx, ry, rx)


def _paint_authentic(config: CorpusConfig, index: int):
    """Pre-compression scene for an authentic sample (exposed for oracles)."""
    rng = np.random.default_rng([config.seed, 0, index])
    return _paint_scene(rng, config.image_size)


def gen_authentic(config: CorpusConfig, index: int) -> CorpusSample:
    img, _ = _paint_authentic(config, index)
    frame = jpeg_round_trip(Frame(img), JpegConfig(config.qf_authentic))
    return CorpusSample(
        frame=frame,
        label="real",
        mask=np.zeros(img.shape[:2], dtype=bool),
        family="none",
        provenance={"seed": config.seed, "index": index, "qf": config.qf_authentic},
    )


def _splice_geometry(rng, config: CorpusConfig, face):
    """Ellipse with area 5..20% of the image, centered inside the face."""
    size = config.image_size
    cy, cx, fry, frx = face
    frac = rng.uniform(0.06, 0.14)
    area = frac * size * size
    aspect = rng.uniform(0.7, 1.0)
    ry = np.sqrt(area / (np.pi * aspect))
    rx = ry * aspect
    ry = min(ry, 0.9 * fry)
    rx = min(rx, 0.9 * frx)
    wy = max(0.0, fry * 0.85 - ry)
    wx = max(0.0, frx * 0.85 - rx)
    scy = cy + rng.uniform(-wy, wy)
    scx = cx + rng.uniform(-wx, wx)
    scy = float(np.clip(scy, ry + config.feather_px + 1, size - ry - config.feather_px - 1))
    scx = float(np.clip(scx, rx + config.feather_px + 1, size - rx - config.feather_px - 1))
    return scy, scx, float(ry), float(rx)


def gen_spliced_fake(config: CorpusConfig, index: int) -> CorpusSample:
    rng = np.random.default_rng([config.seed, 1, index])
    size = config.image_size
    base_sigma = rng.uniform(1.0, 1.5)
    base_amp = rng.uniform(0.02, 0.05)
    base_img, face = _paint_scene(rng, size, texture_sigma=base_sigma, texture_amp=base_amp)
    base = jpeg_round_trip(Frame(base_img), JpegConfig(config.qf_authentic)).pixels

    donor_rng = np.random.default_rng([config.seed, 1, index, 7])
    camouflaged = bool(rng.random() < 0.5)
    geometry = _splice_geometry(rng, config, face)
    if camouflaged:
        # self-splice: the donor is the same scene stored at the donor QF, so
        # the region is visually near-identical and only the compression
        # history betrays it
        donor_img = base_img
    else:
        # visible manipulation: mid-frequency stripe texture (survives the
        # donor quantization, learnable by small conv filters) + luma offset
        donor_img, _ = _paint_scene(donor_rng, size)
        yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
        theta = donor_rng.uniform(0.0, np.pi)
        period = donor_rng.uniform(5.0, 9.0)
        phase = donor_rng.uniform(0.0, 2.0 * np.pi)
        stripes = np.sin(2.0 * np.pi * (np.cos(theta) * xx + np.sin(theta) * yy) / period + phase)
        donor_img = donor_img + donor_rng.uniform(0.1, 0.18) * stripes[:, :, None]
        luma_shift = rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.12)
        donor_img = np.clip(donor_img + luma_shift, 0.0, 1.0)
    donor = jpeg_round_trip(Frame(donor_img), JpegConfig(config.qf_donor)).pixels

    scy, scx, ry, rx = geometry
    rho = _ellipse_rho(size, scy, scx, ry, rx)
    alpha = _feather_alpha(rho, min(ry, rx), config.feather_px)[:, :, None]
    composite = base * (1.0 - alpha) + donor * alpha
    frame = jpeg_round_trip(Frame(np.clip(composite, 0.0, 1.0)), JpegConfig(config.qf_authentic))
    mask = alpha[:, :, 0] > 0.5
    return CorpusSample(
        frame=frame,
        label="fake",
        mask=mask,
        family="splice",
        provenance={
            "seed": config.seed,
            "index": index,
            "qf": config.qf_authentic,
            "qf_donor": config.qf_donor,
            "camouflaged": camouflaged,
            "ellipse": [scy, scx, ry, rx],
        },
    )


def gen_smooth_fake(config: CorpusConfig, index: int) -> CorpusSample:
    rng = np.random.default_rng([config.seed, 2, index])
    size = config.image_size
    # low-texture bases keep this family visually subtle; the blur mostly
    # shows up in residual energy and the high-frequency spectrum
    base_img, face = _paint_scene(
        rng, size,
        texture_sigma=rng.uniform(1.3, 1.7),
        texture_amp=rng.uniform(0.015, 0.03),
    )
    base = jpeg_round_trip(Frame(base_img), JpegConfig(config.qf_authentic)).pixels

    scy, scx, ry, rx = _splice_geometry(rng, config, face)
    rho = _ellipse_rho(size, scy, scx, ry, rx)
    mask = rho < 1.0
    blurred = np.stack([gaussian_filter(base[:, :, c], sigma=3.0) for c in range(3)], axis=2)
    m = blurred[mask].mean(axis=0)
    region = np.clip((blurred - m[None, None, :]) * 1.05 + m[None, None, :], 0.0, 1.0)
    out = base.copy()
    out[mask] = region[mask]
    frame = jpeg_round_trip(Frame(out), JpegConfig(config.qf_authentic))
    return CorpusSample(
        frame=frame,
        label="fake",
        mask=mask,
        family="smooth",
        provenance={
            "seed": config.seed,
            "index": index,
            "qf": config.qf_authentic,
            "ellipse": [scy, scx, float(ry), float(rx)],
        },
    )


def make_corpus(config: CorpusConfig) -> list[CorpusSample]:
    """All configured samples: reals, spliced fakes, then smooth fakes."""
    samples = [gen_authentic(config, i) for i in range(config.n_real)]
    samples += [gen_spliced_fake(config, i) for i in range(config.n_spliced)]
    samples += [gen_smooth_fake(config, i) for i in range(config.n_smooth)]
    return samples
