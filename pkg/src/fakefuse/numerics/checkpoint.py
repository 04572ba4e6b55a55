"""Versioned .npz checkpoints: parameters + optimizer state + JSON metadata.

float64 arrays are stored raw, so save -> load round-trips bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .optim import AdamState
from .tensor import Tensor

FORMAT_VERSION = 1


def save_checkpoint(
    path,
    params: dict[str, Tensor],
    adam: AdamState | None = None,
    meta: dict | None = None,
) -> None:
    arrays: dict[str, np.ndarray] = {
        "__format_version__": np.asarray(FORMAT_VERSION, dtype=np.int64)
    }
    for k, p in params.items():
        arrays[f"param/{k}"] = p.data
    if adam is not None:
        for k in adam.m:
            arrays[f"adam_m/{k}"] = adam.m[k]
            arrays[f"adam_v/{k}"] = adam.v[k]
        arrays["adam/t"] = np.asarray(adam.t, dtype=np.int64)
        arrays["adam/hyper"] = np.asarray([adam.lr, adam.beta1, adam.beta2, adam.eps])
    arrays["meta/json"] = np.asarray(json.dumps(meta or {}, sort_keys=True))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[dict[str, Tensor], AdamState | None, dict]:
    with np.load(path, allow_pickle=False) as z:
        version = int(z["__format_version__"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format version {version}")
        params: dict[str, Tensor] = {}
        m: dict[str, np.ndarray] = {}
        v: dict[str, np.ndarray] = {}
        for key in z.files:
            if key.startswith("param/"):
                params[key[6:]] = Tensor(z[key], requires_grad=True)
            elif key.startswith("adam_m/"):
                m[key[7:]] = np.array(z[key])
            elif key.startswith("adam_v/"):
                v[key[7:]] = np.array(z[key])
        adam = None
        if m:
            lr, b1, b2, eps = (float(x) for x in z["adam/hyper"])
            adam = AdamState(m=m, v=v, t=int(z["adam/t"]), lr=lr, beta1=b1, beta2=b2, eps=eps)
        meta = json.loads(str(z["meta/json"]))
    return params, adam, meta
