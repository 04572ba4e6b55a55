"""Adam optimizer state/step and the cosine learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError, PoisonedGradientError, RangeError
from .tensor import Tensor


@dataclass
class AdamState:
    """First/second moment accumulators keyed like the parameter dict."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: dict[str, Tensor], lr: float = 1e-4) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(p.data) for k, p in params.items()},
        v={k: np.zeros_like(p.data) for k, p in params.items()},
        lr=lr,
    )


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float | None = None,
) -> AdamState:
    """One bias-corrected Adam update, in place on the parameter arrays.

    Aborts (no mutation) if any gradient is non-finite.
    """
    lr = state.lr if lr is None else float(lr)
    for k in params:
        if k not in grads:
            raise KeyError(f"missing gradient for parameter {k!r}")
        if grads[k].shape != params[k].data.shape:
            raise ParameterError(f"gradient shape mismatch for {k!r}")
        if not np.all(np.isfinite(grads[k])):
            raise PoisonedGradientError(f"non-finite gradient for {k!r}; step aborted")
    state.t += 1
    b1t = 1.0 - state.beta1**state.t
    b2t = 1.0 - state.beta2**state.t
    for k, p in params.items():
        g = grads[k]
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g
        mhat = state.m[k] / b1t
        vhat = state.v[k] / b2t
        p.data -= lr * mhat / (np.sqrt(vhat) + state.eps)
    return state


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float = 10.0) -> float:
    """Scale all gradients so their joint L2 norm is at most max_norm."""
    total = math.sqrt(
        float(np.sum([np.sum(g * g) for g in grads.values()])) if grads else 0.0
    )
    if total > max_norm and total > 0.0:
        f = max_norm / total
        for k in grads:
            grads[k] = grads[k] * f
    return total


@dataclass
class CosineSchedule:
    """Cosine annealing from lr0 down to eta_min over t_max epochs."""

    lr0: float = 1e-4
    eta_min: float = 1e-6
    t_max: int = 30

    def __post_init__(self):
        if not self.lr0 > self.eta_min >= 0.0:
            raise ParameterError("require lr0 > eta_min >= 0")
        if self.t_max < 1:
            raise ParameterError("t_max must be a positive integer")


def cosine_lr(schedule: CosineSchedule, t: int) -> float:
    if not 0 <= t <= schedule.t_max:
        raise RangeError(f"epoch {t} outside [0, {schedule.t_max}]")
    span = schedule.lr0 - schedule.eta_min
    return schedule.eta_min + span * (1.0 + math.cos(math.pi * t / schedule.t_max)) / 2.0
