"""Hybrid forensic + learned-feature detection of manipulated images.

The package is organised as a small numpy/scipy library:

- ``numerics``  dense tensors with reverse-mode autodiff, Adam, cosine LR
- ``media``     frame sampling, alignment, resizing, JPEG artifact simulation
- ``forensic``  noise-residual, blockiness and spectral descriptors (83-dim)
- ``deep``      toy CNN and patch-transformer embedders (32-dim each)
- ``fusion``    the trainable fusion head, splits, augmentation, training
- ``explain``   Grad-CAM, forensic heatmaps, IoU alignment, overlays
- ``metrics`` / ``robustness``  evaluation metrics and the robustness harness
- ``corpus``    deterministic synthetic corpus generator + external loader
- ``service``   the real-time verification HTTP service
- ``cli``       the ``fakefuse`` command
"""

__version__ = "0.1.0"
