"""Patch transformer: linear patch embedding, learned positions, pre-norm
attention/MLP blocks, mean-pooled token embedding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, ShapeError
from ..media.frame import Frame, to_gray
from ..numerics import Tensor, no_grad, ops


@dataclass
class VitConfig:
    patch: int = 16
    dim: int = 32
    blocks: int = 2
    heads: int = 2
    mlp_ratio: int = 2
    input_size: int = 224

    def __post_init__(self):
        if self.input_size % self.patch:
            raise ParameterError(f"input {self.input_size} not divisible by patch {self.patch}")
        if self.dim % self.heads:
            raise ParameterError(f"dim {self.dim} not divisible by heads {self.heads}")

    @property
    def num_patches(self) -> int:
        return (self.input_size // self.patch) ** 2

    @property
    def patch_len(self) -> int:
        return self.patch * self.patch  # single-channel branch


def patchify(pixels: np.ndarray, patch: int) -> np.ndarray:
    """(H, W, C) -> (num_patches, patch*patch*C), raster order, channel-last."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 2:
        pixels = pixels[:, :, None]
    h, w, c = pixels.shape
    if h % patch or w % patch:
        raise ShapeError(f"dims {h}x{w} not divisible by patch {patch}")
    gh, gw = h // patch, w // patch
    tiles = pixels.reshape(gh, patch, gw, patch, c).transpose(0, 2, 1, 3, 4)
    return tiles.reshape(gh * gw, patch * patch * c)


def unpatchify(patches: np.ndarray, h: int, w: int, patch: int, channels: int = 1) -> np.ndarray:
    gh, gw = h // patch, w // patch
    tiles = patches.reshape(gh, gw, patch, patch, channels)
    return tiles.transpose(0, 2, 1, 3, 4).reshape(h, w, channels)


def init_vit_params(cfg: VitConfig, rng: np.random.Generator, prefix: str = "vit.") -> dict[str, Tensor]:
    d = cfg.dim
    p: dict[str, Tensor] = {}

    def t(arr):
        return Tensor(arr, requires_grad=True)

    p[f"{prefix}embed.w"] = t(rng.normal(0.0, 1.0 / np.sqrt(cfg.patch_len), size=(cfg.patch_len, d)))
    p[f"{prefix}embed.b"] = t(np.zeros(d))
    p[f"{prefix}pos"] = t(rng.normal(0.0, 0.02, size=(cfg.num_patches, d)))
    for i in range(cfg.blocks):
        pre = f"{prefix}b{i}."
        p[pre + "ln1.g"] = t(np.ones(d))
        p[pre + "ln1.b"] = t(np.zeros(d))
        for name in ("wq", "wk", "wv", "wo"):
            p[pre + f"attn.{name}"] = t(rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, d)))
        for name in ("bq", "bk", "bv", "bo"):
            p[pre + f"attn.{name}"] = t(np.zeros(d))
        p[pre + "ln2.g"] = t(np.ones(d))
        p[pre + "ln2.b"] = t(np.zeros(d))
        hidden = d * cfg.mlp_ratio
        p[pre + "mlp.w1"] = t(rng.normal(0.0, np.sqrt(2.0 / d), size=(d, hidden)))
        p[pre + "mlp.b1"] = t(np.zeros(hidden))
        p[pre + "mlp.w2"] = t(rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, d)))
        p[pre + "mlp.b2"] = t(np.zeros(d))
    return p


def multihead_attention(
    tokens: Tensor,
    params: dict[str, Tensor],
    heads: int,
    prefix: str,
    return_weights: bool = False,
):
    """Scaled dot-product attention over (B, T, D) or (T, D) tokens."""
    single = tokens.ndim == 2
    x = ops.reshape(tokens, (1,) + tuple(tokens.shape)) if single else tokens
    b, t, d = x.shape
    if d % heads:
        raise ParameterError(f"dim {d} not divisible by heads {heads}")
    dh = d // heads

    def proj(name_w, name_b):
        flat = ops.reshape(x, (b * t, d))
        y = ops.add(ops.matmul(flat, params[prefix + name_w]), params[prefix + name_b])
        y = ops.reshape(y, (b, t, heads, dh))
        return ops.transpose(y, (0, 2, 1, 3))  # (B, h, T, dh)

    q = proj("attn.wq", "attn.bq")
    k = proj("attn.wk", "attn.bk")
    v = proj("attn.wv", "attn.bv")
    scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(dh))
    weights = ops.softmax(scores, axis=-1)
    ctx = ops.matmul(weights, v)  # (B, h, T, dh)
    ctx = ops.reshape(ops.transpose(ctx, (0, 2, 1, 3)), (b * t, d))
    out = ops.add(ops.matmul(ctx, params[prefix + "attn.wo"]), params[prefix + "attn.bo"])
    out = ops.reshape(out, (b, t, d))
    if single:
        out = ops.reshape(out, (t, d))
    if return_weights:
        w = weights.data[0] if single else weights.data
        return out, w
    return out


def vit_forward(
    x: Tensor, params: dict[str, Tensor], cfg: VitConfig, prefix: str = "vit."
) -> Tensor:
    """(B, 1, S, S) image tensor -> (B, dim) mean-pooled embedding."""
    if x.ndim != 4 or x.shape[1] != 1:
        raise ShapeError(f"expected (B, 1, S, S), got {x.shape}")
    b, _, s, _ = x.shape
    if s != cfg.input_size:
        raise ShapeError(f"expected input size {cfg.input_size}, got {s}")
    g = s // cfg.patch
    t = g * g
    # patch extraction as differentiable reshapes (single channel)
    tiles = ops.reshape(x, (b, g, cfg.patch, g, cfg.patch))
    tiles = ops.transpose(tiles, (0, 1, 3, 2, 4))
    patches = ops.reshape(tiles, (b * t, cfg.patch_len))
    tok = ops.add(ops.matmul(patches, params[f"{prefix}embed.w"]), params[f"{prefix}embed.b"])
    tok = ops.reshape(tok, (b, t, cfg.dim))
    tok = ops.add(tok, params[f"{prefix}pos"])
    for i in range(cfg.blocks):
        pre = f"{prefix}b{i}."
        normed = ops.layer_norm(tok, params[pre + "ln1.g"], params[pre + "ln1.b"])
        tok = ops.add(tok, multihead_attention(normed, params, cfg.heads, pre))
        normed = ops.layer_norm(tok, params[pre + "ln2.g"], params[pre + "ln2.b"])
        flat = ops.reshape(normed, (b * t, cfg.dim))
        h = ops.gelu(ops.add(ops.matmul(flat, params[pre + "mlp.w1"]), params[pre + "mlp.b1"]))
        h = ops.add(ops.matmul(h, params[pre + "mlp.w2"]), params[pre + "mlp.b2"])
        tok = ops.add(tok, ops.reshape(h, (b, t, cfg.dim)))
    return ops.mean(tok, axis=1)


def vit_embed(frame: Frame, params: dict[str, Tensor], cfg: VitConfig) -> np.ndarray:
    gray = to_gray(frame)
    with no_grad():
        out = vit_forward(Tensor(gray[None, None]), params, cfg)
    return out.data[0]
