"""Small conv net: conv-ReLU-maxpool blocks, global average pooled embedding.

The final block's (post-ReLU, post-pool) activations are retained so the
explanation layer can weight them by class-logit gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, ShapeError
from ..media.frame import Frame, to_gray
from ..numerics import Tensor, no_grad, ops


@dataclass
class CnnConfig:
    channels: tuple = (8, 16, 32)
    kernel: int = 3
    pool: int = 2
    input_size: int = 224
    in_channels: int = 1

    def __post_init__(self):
        self.channels = tuple(int(c) for c in self.channels)
        down = self.pool ** len(self.channels)
        if self.input_size % down:
            raise ParameterError(
                f"input size {self.input_size} not divisible by {down}"
            )

    @property
    def embed_dim(self) -> int:
        return self.channels[-1]

    @property
    def act_size(self) -> int:
        return self.input_size // self.pool ** len(self.channels)


def init_cnn_params(cfg: CnnConfig, rng: np.random.Generator, prefix: str = "cnn.") -> dict[str, Tensor]:
    params: dict[str, Tensor] = {}
    cin = cfg.in_channels
    for i, cout in enumerate(cfg.channels):
        fan_in = cin * cfg.kernel * cfg.kernel
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(cout, cin, cfg.kernel, cfg.kernel))
        params[f"{prefix}conv{i}.w"] = Tensor(w, requires_grad=True)
        params[f"{prefix}conv{i}.b"] = Tensor(np.zeros(cout), requires_grad=True)
        cin = cout
    return params


def cnn_forward(
    x: Tensor, params: dict[str, Tensor], cfg: CnnConfig, prefix: str = "cnn."
) -> tuple[Tensor, Tensor]:
    """(B, C_in, S, S) -> (embedding (B, D), last activations (B, D, s, s))."""
    if x.ndim != 4 or x.shape[2] != cfg.input_size or x.shape[3] != cfg.input_size:
        raise ShapeError(f"expected (B, {cfg.in_channels}, {cfg.input_size}, {cfg.input_size}), got {x.shape}")
    h = x
    pad = cfg.kernel // 2
    for i, cout in enumerate(cfg.channels):
        h = ops.conv2d(h, params[f"{prefix}conv{i}.w"], stride=1, padding=pad)
        b = ops.reshape(params[f"{prefix}conv{i}.b"], (1, cout, 1, 1))
        h = ops.relu(ops.add(h, b))
        h = ops.max_pool2d(h, cfg.pool)
    acts = h
    embed = ops.mean(ops.reshape(h, (h.shape[0], h.shape[1], -1)), axis=2)
    return embed, acts


def cnn_embed(frame: Frame, params: dict[str, Tensor], cfg: CnnConfig) -> tuple[np.ndarray, np.ndarray]:
    """Single-frame inference: (embedding, retained activations) as arrays."""
    gray = to_gray(frame)
    with no_grad():
        embed, acts = cnn_forward(Tensor(gray[None, None]), params, cfg)
    return embed.data[0], acts.data[0]
