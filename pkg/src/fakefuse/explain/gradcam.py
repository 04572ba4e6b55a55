"""Class-activation heatmap from fake-logit gradients on the last conv block."""

from __future__ import annotations

import numpy as np

from ..errors import StateError
from ..fusion.model import FusionModel
from ..maps import Heatmap, minmax_heatmap
from ..media.align import bilinear_resize
from ..media.frame import Frame, to_gray
from ..numerics import GRAD_LOCK, Tensor, backward, default_tape, ops

TARGET_INDEX = {"real": 0, "fake": 1}


def grad_cam(frame: Frame, model: FusionModel, target: str = "fake") -> Heatmap:
    """Channel activations weighted by spatially averaged logit gradients,
    rectified, upsampled to frame size and min-max normalized."""
    if model.stats is None:
        raise StateError("grad_cam needs a trained model")
    if not model.mask.cnn:
        raise StateError("grad_cam needs the CNN branch enabled")
    from ..forensic.vector import forensic_vector

    gray = to_gray(frame)
    fvec = forensic_vector(frame)
    retain: dict = {}
    with GRAD_LOCK:
        default_tape().clear()
        x = Tensor(gray[None, None])
        logits = model.forward(x, fvec[None], training=False, retain=retain)
        selector = np.zeros((1, 2))
        selector[0, TARGET_INDEX[target]] = 1.0
        backward(ops.sum(ops.mul(logits, Tensor(selector))))
        acts = retain["acts"]
        grad = np.zeros_like(acts.data) if acts.grad is None else acts.grad
        weights = grad[0].mean(axis=(1, 2))  # one weight per channel
        cam = np.maximum((weights[:, None, None] * acts.data[0]).sum(axis=0), 0.0)
        for p in model.params.values():
            p.clear_grad()
    up = bilinear_resize(cam[:, :, None], frame.height, frame.width)[:, :, 0]
    heat = minmax_heatmap(up, source="grad_cam")
    return heat
