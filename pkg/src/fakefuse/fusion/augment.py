"""Training-time augmentation: horizontal flip, brightness/contrast jitter,
Gaussian noise injection. All draws come from the caller's RNG."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..media.frame import Frame


@dataclass
class AugmentToggles:
    flip: bool = True
    jitter: bool = True
    noise: bool = True

    @classmethod
    def none(cls) -> "AugmentToggles":
        return cls(flip=False, jitter=False, noise=False)

    @property
    def any(self) -> bool:
        return self.flip or self.jitter or self.noise


NOISE_SIGMA = 0.01
JITTER_RANGE = 0.1  # +-10% brightness and contrast


def hflip(frame: Frame) -> Frame:
    return Frame(frame.pixels[:, ::-1, :].copy(), frame.source_timestamp_s)


def augment(frame: Frame, rng: np.random.Generator, toggles: AugmentToggles) -> Frame:
    if not toggles.any:
        return frame
    px = frame.pixels
    if toggles.flip and rng.random() < 0.5:
        px = px[:, ::-1, :]
    if toggles.jitter:
        brightness = 1.0 + rng.uniform(-JITTER_RANGE, JITTER_RANGE)
        contrast = 1.0 + rng.uniform(-JITTER_RANGE, JITTER_RANGE)
        m = px.mean()
        px = (px * brightness - m) * contrast + m
    if toggles.noise:
        px = px + rng.normal(0.0, NOISE_SIGMA, size=px.shape)
    return Frame(np.clip(px, 0.0, 1.0), frame.source_timestamp_s)
