"""Binary classification metrics and the threshold-swept ROC curve.

Undefined ratios (zero denominators) are reported as None rather than 0 so
tables cannot silently flatter a degenerate run. AUC uses trapezoidal
integration over the tie-grouped curve, which credits tied pairs 0.5 and
therefore matches rank-based pair counting exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParameterError


@dataclass
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            v = getattr(self, name)
            if v < 0 or int(v) != v:
                raise ParameterError(f"{name} must be a non-negative integer, got {v}")
            setattr(self, name, int(v))

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass
class ClassificationMetrics:
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None


def classification_metrics(c: ConfusionCounts) -> ClassificationMetrics:
    if c.total == 0:
        raise ContractError("confusion counts are all zero")
    accuracy = (c.tp + c.tn) / c.total
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else None
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f1 = None
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return ClassificationMetrics(accuracy, precision, recall, f1)


def confusion_from_scores(scores, labels, threshold: float = 0.5) -> ConfusionCounts:
    """Counts with fake = positive; scores >= threshold predict fake."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pred = scores >= threshold
    return ConfusionCounts(
        tp=int(np.sum(pred & (labels == 1))),
        tn=int(np.sum(~pred & (labels == 0))),
        fp=int(np.sum(pred & (labels == 0))),
        fn=int(np.sum(~pred & (labels == 1))),
    )


@dataclass
class RocCurve:
    points: np.ndarray  # ordered (FPR, TPR) pairs including (0,0) and (1,1)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if np.any(np.diff(pts[:, 0]) < -1e-12) or np.any(np.diff(pts[:, 1]) < -1e-12):
            raise ParameterError("ROC points must be non-decreasing")
        self.points = pts


def roc_auc(scores, labels) -> tuple[RocCurve, float]:
    """Threshold sweep over all distinct scores; trapezoidal AUC."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ContractError("roc_auc requires both classes present")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    pts = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = len(s)
    while i < n:
        j = i
        while j < n and s[j] == s[i]:  # tie group enters together
            j += 1
        tp += int(np.sum(y[i:j] == 1))
        fp += int(np.sum(y[i:j] == 0))
        pts.append((fp / n_neg, tp / n_pos))
        i = j
    if pts[-1] != (1.0, 1.0):
        pts.append((1.0, 1.0))
    curve = RocCurve(np.asarray(pts))
    x = curve.points[:, 0]
    t = curve.points[:, 1]
    auc = float(np.trapz(t, x))
    return curve, auc
