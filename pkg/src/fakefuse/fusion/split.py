"""Stratified 80-10-10 split with floor rounding, remainders to train."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import StratificationError


@dataclass
class SplitAssignment:
    labels: np.ndarray  # per-sample partition: 'train' | 'val' | 'test'

    def indices(self, part: str) -> np.ndarray:
        return np.flatnonzero(self.labels == part)


def stratified_split(labels, seed: int) -> SplitAssignment:
    """Per-class shuffle then 80/10/10 partition, deterministic per seed."""
    labels = np.asarray(labels)
    out = np.empty(len(labels), dtype=object)
    rng = np.random.default_rng([seed, 23])
    for cls in sorted(np.unique(labels).tolist()):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < 10:
            raise StratificationError(
                f"class {cls!r} has {len(idx)} samples; at least 10 required"
            )
        idx = idx[rng.permutation(len(idx))]
        n = len(idx)
        n_val = n // 10
        n_test = n // 10
        n_train = n - n_val - n_test
        out[idx[:n_train]] = "train"
        out[idx[n_train : n_train + n_val]] = "val"
        out[idx[n_train + n_val :]] = "test"
    return SplitAssignment(labels=out.astype(str))
