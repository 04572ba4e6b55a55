"""Independent oracles shared across test modules.

These stay deliberately naive (loops, pair counting, central differences)
so they never share code paths with the implementations they check.
"""

from __future__ import annotations

import numpy as np

from fakefuse.numerics import Tensor, backward


def finite_difference_grad(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function f at x, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm relative error between two gradient arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1e-8)
    return float(np.abs(a - b).max(initial=0.0) / denom)


def check_grad(build, x0: np.ndarray, h: float = 1e-5, tol: float = 1e-4) -> float:
    """Compare autodiff gradient of build(x)->scalar Tensor against central FD.

    ``build`` receives a raw array, constructs the graph and returns the
    scalar loss tensor plus the input leaf tensor it created.
    """
    loss, leaf = build(np.array(x0, dtype=np.float64))
    backward(loss)
    analytic = leaf.grad.copy()

    def f(arr):
        loss2, _ = build(arr)
        from fakefuse.numerics import default_tape

        default_tape().clear()
        return loss2.item()

    fd = finite_difference_grad(f, np.array(x0, dtype=np.float64), h=h)
    err = rel_err(analytic, fd)
    assert err <= tol, f"gradient mismatch: rel err {err:.3e} > {tol}"
    return err


def pair_count_auc(scores, labels) -> float:
    """Brute-force Wilcoxon AUC: concordant pairs + half credit for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def leaf(x, requires_grad=True) -> Tensor:
    return Tensor(np.asarray(x, dtype=np.float64), requires_grad=requires_grad)
