"""Differentiable tensor operations.

Forward math is plain numpy; each op registers a closure on the active tape
that maps the output gradient to parent gradients. Convolution uses an
im2col view + tensordot forward and a 9-slice scatter backward, which keeps
a training step free of per-pixel Python loops.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ParameterError, ShapeError
from .tensor import Tensor, as_tensor, record, tracks_grad


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor._wrap(a.data + b.data, tracks_grad(a, b))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g, b.shape))

    record(out, (a, b), rule)
    return out


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor._wrap(a.data * b.data, tracks_grad(a, b))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g * a.data, b.shape))

    record(out, (a, b), rule)
    return out


def scale(a, s: float) -> Tensor:
    a = as_tensor(a)
    s = float(s)
    out = Tensor._wrap(a.data * s, tracks_grad(a))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g * s)

    record(out, (a,), rule)
    return out


def neg(a) -> Tensor:
    return scale(a, -1.0)


def sub(a, b) -> Tensor:
    return add(a, neg(b))


def matmul(a, b) -> Tensor:
    """Matrix product; supports stacked (batched) operands like np.matmul."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError("matmul operands must be at least 2-d")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} vs {b.shape}")
    out = Tensor._wrap(np.matmul(a.data, b.data), tracks_grad(a, b))

    def rule(g):
        if a.requires_grad:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            a.accumulate_grad(_unbroadcast(ga, a.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b.accumulate_grad(_unbroadcast(gb, b.shape))

    record(out, (a, b), rule)
    return out


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor._wrap(np.maximum(a.data, 0.0), tracks_grad(a))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g * (a.data > 0.0))

    record(out, (a,), rule)
    return out


def gelu(a) -> Tensor:
    """Exact (erf-based) GELU."""
    from scipy.special import erf

    a = as_tensor(a)
    x = a.data
    cdf = 0.5 * (1.0 + erf(x / np.sqrt(2.0)))
    out = Tensor._wrap(x * cdf, tracks_grad(a))

    def rule(g):
        if a.requires_grad:
            pdf = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
            a.accumulate_grad(g * (cdf + x * pdf))

    record(out, (a,), rule)
    return out


def clip(a, lo: float, hi: float) -> Tensor:
    """Elementwise clamp; gradient passes only through unsaturated entries."""
    a = as_tensor(a)
    y = np.clip(a.data, lo, hi)
    out = Tensor._wrap(y, tracks_grad(a))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g * ((a.data > lo) & (a.data < hi)))

    record(out, (a,), rule)
    return out


def powf(a, p: float) -> Tensor:
    """Elementwise power with float exponent; inputs must be positive."""
    a = as_tensor(a)
    p = float(p)
    if np.any(a.data <= 0.0):
        raise ParameterError("powf needs strictly positive inputs")
    y = a.data**p
    out = Tensor._wrap(y, tracks_grad(a))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g * p * a.data ** (p - 1.0))

    record(out, (a,), rule)
    return out


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = Tensor._wrap(a.data.reshape(shape), tracks_grad(a))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g.reshape(a.shape))

    record(out, (a,), rule)
    return out


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    axes = tuple(axes)
    out = Tensor._wrap(np.ascontiguousarray(a.data.transpose(axes)), tracks_grad(a))
    inverse = tuple(np.argsort(axes))

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g.transpose(inverse))

    record(out, (a,), rule)
    return out


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor._wrap(
        np.concatenate([t.data for t in tensors], axis=axis), tracks_grad(*tensors)
    )
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def rule(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                t.accumulate_grad(g[tuple(idx)])

    record(out, tuple(tensors), rule)
    return out


def sum(a, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001 - mirrors np.sum
    a = as_tensor(a)
    out = Tensor._wrap(a.data.sum(axis=axis, keepdims=keepdims), tracks_grad(a))

    def rule(g):
        if not a.requires_grad:
            return
        if axis is None:
            a.accumulate_grad(np.broadcast_to(g, a.shape).copy())
            return
        gg = g
        if not keepdims:
            gg = np.expand_dims(gg, axis)
        a.accumulate_grad(np.broadcast_to(gg, a.shape).copy())

    record(out, (a,), rule)
    return out


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        n = a.size
    else:
        n = a.shape[axis]
    return scale(sum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor._wrap(y, tracks_grad(a))

    def rule(g):
        if a.requires_grad:
            inner = (g * y).sum(axis=axis, keepdims=True)
            a.accumulate_grad((g - inner) * y)

    record(out, (a,), rule)
    return out


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale/shift."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = Tensor._wrap(xhat * gamma.data + beta.data, tracks_grad(x, gamma, beta))
    n = x.shape[-1]

    def rule(g):
        if gamma.requires_grad:
            gamma.accumulate_grad(_unbroadcast(g * xhat, gamma.shape))
        if beta.requires_grad:
            beta.accumulate_grad(_unbroadcast(g, beta.shape))
        if x.requires_grad:
            gx = g * gamma.data
            s1 = gx.sum(axis=-1, keepdims=True)
            s2 = (gx * xhat).sum(axis=-1, keepdims=True)
            x.accumulate_grad(inv / n * (n * gx - s1 - xhat * s2))

    record(out, (x, gamma, beta), rule)
    return out


def conv2d(x, kernels, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation with zero padding.

    ``x`` is (C_in, H, W) or batched (B, C_in, H, W); ``kernels`` is
    (C_out, C_in, kh, kw) with odd kh, kw. Output height is
    floor((H + 2p - kh)/stride) + 1.
    """
    x, kernels = as_tensor(x), as_tensor(kernels)
    squeeze = x.ndim == 3
    xd = x.data[None] if squeeze else x.data
    if xd.ndim != 4 or kernels.ndim != 4:
        raise ShapeError("conv2d expects (B,C,H,W) input and (Co,Ci,kh,kw) kernels")
    b, ci, h, w = xd.shape
    co, cik, kh, kw = kernels.shape
    if cik != ci:
        raise ShapeError(f"kernel channels {cik} != input channels {ci}")
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError("kernel sides must be odd")
    if stride < 1:
        raise ParameterError("stride must be >= 1")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp or kw > wp:
        raise ShapeError("kernel larger than padded input")
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1

    xp = xd
    if padding:
        xp = np.pad(xd, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    cols = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    # cols: (B, Ci, Ho, Wo, kh, kw); contract over (Ci, kh, kw)
    y = np.tensordot(cols, kernels.data, axes=([1, 4, 5], [1, 2, 3]))
    y = np.ascontiguousarray(np.moveaxis(y, 3, 1))  # (B, Co, Ho, Wo)
    out = Tensor._wrap(y[0] if squeeze else y, tracks_grad(x, kernels))

    def rule(g):
        gb = g[None] if squeeze else g
        if kernels.requires_grad:
            gk = np.tensordot(gb, cols, axes=([0, 2, 3], [0, 2, 3]))
            kernels.accumulate_grad(gk)
        if x.requires_grad:
            # t[ci, i, j, b, ho, wo] = sum_co k[co,ci,i,j] * g[b,co,ho,wo]
            t = np.tensordot(kernels.data, gb, axes=([0], [1]))
            gxp = np.zeros((b, ci, hp, wp))
            for i in range(kh):
                for j in range(kw):
                    gxp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += (
                        t[:, i, j].transpose(1, 0, 2, 3)
                    )
            gx = gxp[:, :, padding : padding + h, padding : padding + w]
            x.accumulate_grad(gx[0] if squeeze else gx)

    record(out, (x, kernels), rule)
    return out


def max_pool2d(x, size: int = 2) -> Tensor:
    """Non-overlapping max pooling with stride == size; dims must divide."""
    x = as_tensor(x)
    squeeze = x.ndim == 3
    xd = x.data[None] if squeeze else x.data
    b, c, h, w = xd.shape
    if h % size or w % size:
        raise ShapeError(f"pooled dims must divide by {size}, got {h}x{w}")
    ho, wo = h // size, w // size
    win = xd.reshape(b, c, ho, size, wo, size).transpose(0, 1, 2, 4, 3, 5)
    win = win.reshape(b, c, ho, wo, size * size)
    idx = win.argmax(axis=-1)
    y = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    out = Tensor._wrap(y[0] if squeeze else np.ascontiguousarray(y), tracks_grad(x))

    def rule(g):
        if not x.requires_grad:
            return
        gb = g[None] if squeeze else g
        gw = np.zeros((b, c, ho, wo, size * size))
        np.put_along_axis(gw, idx[..., None], gb[..., None], axis=-1)
        gx = gw.reshape(b, c, ho, wo, size, size).transpose(0, 1, 2, 4, 3, 5)
        gx = gx.reshape(b, c, h, w)
        x.accumulate_grad(gx[0] if squeeze else gx)

    record(out, (x,), rule)
    return out


def softmax_cross_entropy(logits, labels) -> tuple[Tensor, np.ndarray]:
    """Mean negative log-likelihood over a batch; returns (loss, probabilities).

    ``logits`` is (B, K) with K >= 2; ``labels`` are integer class indices.
    Stabilized by row-max subtraction.
    """
    logits = as_tensor(logits)
    if logits.ndim != 2 or logits.shape[1] < 2:
        raise ShapeError("logits must be (B, K) with K >= 2")
    labels = np.asarray(labels, dtype=np.int64)
    bsz, k = logits.shape
    if labels.shape != (bsz,):
        raise ShapeError(f"labels must have shape ({bsz},)")
    if labels.min() < 0 or labels.max() >= k:
        raise IndexError("label out of range")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    probs = np.exp(logp)
    nll = -logp[np.arange(bsz), labels]
    out = Tensor._wrap(np.asarray(nll.mean()), tracks_grad(logits))

    def rule(g):
        if logits.requires_grad:
            d = probs.copy()
            d[np.arange(bsz), labels] -= 1.0
            logits.accumulate_grad(d * (float(g) / bsz))

    record(out, (logits,), rule)
    return out, probs


def dropout_mask(
    shape, p: float, rng: np.random.Generator, training: bool = True
) -> np.ndarray:
    """Inverted-dropout mask: zeros with prob p, else 1/(1-p); ones at inference."""
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return np.ones(shape)
    keep = rng.random(shape) >= p
    return keep / (1.0 - p)
