"""Trainable fusion of forensic + CNN + transformer features.

The fused input is the concatenation [forensic(83) | cnn(32) | vit(32)],
each segment standardized with train-split statistics; masked-out segments
are zero-filled so the head shape never changes across ablations. The head
is dense(147->64) + ReLU + dropout(0.5) + dense(64->2) + softmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..deep.cnn import CnnConfig, cnn_forward, init_cnn_params
from ..deep.vit import VitConfig, init_vit_params, vit_forward
from ..errors import ParameterError, StateError
from ..forensic.vector import FORENSIC_DIM, forensic_vector
from ..media.frame import Frame, to_gray
from ..numerics import Tensor, no_grad, ops
from ..numerics.checkpoint import load_checkpoint, save_checkpoint


@dataclass
class AblationMask:
    forensic: bool = True
    cnn: bool = True
    vit: bool = True

    def __post_init__(self):
        if not (self.forensic or self.cnn or self.vit):
            raise ParameterError("at least one feature segment must stay enabled")

    @property
    def name(self) -> str:
        if self.forensic and self.cnn and self.vit:
            return "hybrid"
        parts = [n for n, on in (("forensic", self.forensic), ("cnn", self.cnn), ("vit", self.vit)) if on]
        return "+".join(parts)

    def to_dict(self) -> dict:
        return {"forensic": self.forensic, "cnn": self.cnn, "vit": self.vit}


@dataclass
class Standardization:
    mean: np.ndarray
    std: np.ndarray

    # standardized values are clamped to this band; fitting-set values stay
    # well inside it, so the clamp only bounds out-of-distribution excursions
    # (heavy corruption, adversarial noise) that would saturate the head
    CLIP = 12.0

    @classmethod
    def fit(cls, rows: np.ndarray, segments=None, rel_floor: float = 0.05) -> "Standardization":
        """Per-coordinate mean/std. Near-constant coordinates get their std
        floored to a fraction of the segment's median std so 1/std never
        amplifies degenerate directions (which would swamp the gradient
        clipping budget of every other parameter)."""
        mean = rows.mean(axis=0)
        std = rows.std(axis=0)
        segments = segments or [(0, rows.shape[1])]
        for lo, hi in segments:
            med = np.median(std[lo:hi])
            floor = rel_floor * med if med > 0 else 1.0
            std[lo:hi] = np.maximum(std[lo:hi], floor)
        return cls(mean=mean, std=np.maximum(std, 1e-8))

    def apply(self, rows: np.ndarray) -> np.ndarray:
        return np.clip((rows - self.mean) / self.std, -self.CLIP, self.CLIP)


def fuse(
    forensic: np.ndarray,
    cnn: np.ndarray,
    vit: np.ndarray,
    mask: AblationMask,
    stats: Standardization | None,
) -> np.ndarray:
    """Standardized, mask-zero-filled fused vector (length 147 by default)."""
    if stats is None:
        raise StateError("standardization statistics not fitted")
    raw = np.concatenate([forensic, cnn, vit])
    z = stats.apply(raw[None, :])[0]
    segs = [
        (mask.forensic, len(forensic)),
        (mask.cnn, len(cnn)),
        (mask.vit, len(vit)),
    ]
    off = 0
    for enabled, width in segs:
        if not enabled:
            z[off : off + width] = 0.0
        off += width
    return z


class FusionModel:
    """Feature extractors + fusion head with shared parameter dict."""

    def __init__(
        self,
        cnn_cfg: CnnConfig | None = None,
        vit_cfg: VitConfig | None = None,
        mask: AblationMask | None = None,
        hidden: int = 64,
        dropout: float = 0.5,
        seed: int = 0,
    ):
        input_size = (cnn_cfg or CnnConfig()).input_size
        self.cnn_cfg = cnn_cfg or CnnConfig(input_size=input_size)
        self.vit_cfg = vit_cfg or VitConfig(input_size=input_size)
        if self.cnn_cfg.input_size != self.vit_cfg.input_size:
            raise ParameterError("CNN and transformer input sizes must match")
        self.mask = mask or AblationMask()
        self.hidden = hidden
        self.dropout = dropout
        self.seed = seed
        self.stats: Standardization | None = None
        self.meta: dict = {}
        rng = np.random.default_rng([seed, 101])
        self.params: dict[str, Tensor] = {}
        self.params.update(init_cnn_params(self.cnn_cfg, rng))
        self.params.update(init_vit_params(self.vit_cfg, rng))
        f = self.fused_dim
        self.params["head.w1"] = Tensor(rng.normal(0.0, np.sqrt(2.0 / f), size=(f, hidden)), requires_grad=True)
        self.params["head.b1"] = Tensor(np.zeros(hidden), requires_grad=True)
        self.params["head.w2"] = Tensor(rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, 2)), requires_grad=True)
        self.params["head.b2"] = Tensor(np.zeros(2), requires_grad=True)

    @property
    def input_size(self) -> int:
        return self.cnn_cfg.input_size

    @property
    def fused_dim(self) -> int:
        return FORENSIC_DIM + self.cnn_cfg.embed_dim + self.vit_cfg.dim

    def trainable_keys(self) -> list[str]:
        keys = [k for k in self.params if k.startswith("head.")]
        if self.mask.cnn:
            keys += [k for k in self.params if k.startswith("cnn.")]
        if self.mask.vit:
            keys += [k for k in self.params if k.startswith("vit.")]
        return keys

    def _segment_tensor(self, x: Tensor, which: str, retain):
        """Standardized segment tensor of shape (B, width), or zeros if masked."""
        b = x.shape[0]
        fdim, cdim, vdim = FORENSIC_DIM, self.cnn_cfg.embed_dim, self.vit_cfg.dim
        if which == "cnn":
            lo, width, enabled = fdim, cdim, self.mask.cnn
        else:
            lo, width, enabled = fdim + cdim, vdim, self.mask.vit
        if not enabled:
            return Tensor(np.zeros((b, width)))
        if which == "cnn":
            emb, acts = cnn_forward(x, self.params, self.cnn_cfg)
            if retain is not None:
                retain["acts"] = acts
        else:
            emb = vit_forward(x, self.params, self.vit_cfg)
        mu = self.stats.mean[lo : lo + width]
        sd = self.stats.std[lo : lo + width]
        z = ops.mul(ops.add(emb, Tensor(-mu)), Tensor(1.0 / sd))
        return ops.clip(z, -Standardization.CLIP, Standardization.CLIP)

    def forward(
        self,
        x: Tensor,
        forensic_rows: np.ndarray,
        training: bool = False,
        rng: np.random.Generator | None = None,
        retain: dict | None = None,
    ) -> Tensor:
        """Logits (B, 2) for a batch of grayscale inputs + forensic rows."""
        if self.stats is None:
            raise StateError("model not trained: standardization statistics missing")
        b = x.shape[0]
        fdim = FORENSIC_DIM
        if self.mask.forensic:
            zf = self.stats.apply(
                np.concatenate(
                    [forensic_rows, np.zeros((b, self.fused_dim - fdim))], axis=1
                )
            )[:, :fdim]
        else:
            zf = np.zeros((b, fdim))
        segments = [
            Tensor(zf),
            self._segment_tensor(x, "cnn", retain),
            self._segment_tensor(x, "vit", retain),
        ]
        fused = ops.concat(segments, axis=1)
        if retain is not None:
            retain["fused"] = fused
        h = ops.relu(ops.add(ops.matmul(fused, self.params["head.w1"]), self.params["head.b1"]))
        if training and self.dropout > 0.0:
            if rng is None:
                raise ParameterError("training forward needs an RNG for dropout")
            mask = ops.dropout_mask(h.shape, self.dropout, rng, training=True)
            h = ops.mul(h, Tensor(mask))
        return ops.add(ops.matmul(h, self.params["head.w2"]), self.params["head.b2"])

    def predict_batch(self, grays: np.ndarray, forensic_rows: np.ndarray) -> np.ndarray:
        """(B, 2) probabilities, deterministic (no dropout, no recording)."""
        with no_grad():
            logits = self.forward(Tensor(grays[:, None]), forensic_rows, training=False)
            return ops.softmax(logits, axis=-1).data

    def predict(self, frame: Frame) -> tuple[float, float]:
        """(p_real, p_fake) for one frame."""
        if self.stats is None:
            raise StateError("model not trained")
        gray = to_gray(frame)
        fvec = forensic_vector(frame)
        probs = self.predict_batch(gray[None], fvec[None])[0]
        return float(probs[0]), float(probs[1])

    # persistence ---------------------------------------------------------
    def save(self, path, adam=None) -> None:
        meta = dict(self.meta)
        meta.update(
            {
                "cnn_cfg": vars(self.cnn_cfg) | {"channels": list(self.cnn_cfg.channels)},
                "vit_cfg": vars(self.vit_cfg),
                "mask": self.mask.to_dict(),
                "hidden": self.hidden,
                "dropout": self.dropout,
                "seed": self.seed,
            }
        )
        if self.stats is not None:
            meta["stats_mean"] = self.stats.mean.tolist()
            meta["stats_std"] = self.stats.std.tolist()
        save_checkpoint(path, self.params, adam=adam, meta=meta)

    @classmethod
    def load(cls, path, precision: str = "float64") -> "FusionModel":
        params, _, meta = load_checkpoint(path)
        cnn_kwargs = dict(meta["cnn_cfg"])
        cnn_kwargs["channels"] = tuple(cnn_kwargs["channels"])
        model = cls(
            cnn_cfg=CnnConfig(**cnn_kwargs),
            vit_cfg=VitConfig(**meta["vit_cfg"]),
            mask=AblationMask(**meta["mask"]),
            hidden=meta["hidden"],
            dropout=meta["dropout"],
            seed=meta["seed"],
        )
        if precision == "float32":
            for p in params.values():
                p.data = p.data.astype(np.float32).astype(np.float64)
        model.params = params
        if "stats_mean" in meta:
            model.stats = Standardization(
                mean=np.asarray(meta["stats_mean"]), std=np.asarray(meta["stats_std"])
            )
        model.meta = {
            k: v
            for k, v in meta.items()
            if k not in ("cnn_cfg", "vit_cfg", "mask", "hidden", "dropout", "seed", "stats_mean", "stats_std")
        }
        return model


def clip_score(frame_p_fake) -> tuple[float, str, float]:
    """Clip-level (p_fake, verdict, confidence) from per-frame fake probabilities.

    Mean pooling; ties at 0.5 go to FAKE (conservative for moderation).
    """
    from ..errors import ContractError

    probs = np.asarray(list(frame_p_fake), dtype=np.float64)
    if probs.size == 0:
        raise ContractError("clip_score needs at least one frame probability")
    p = float(probs.mean())
    verdict = "FAKE" if p >= 0.5 else "REAL"
    return p, verdict, max(p, 1.0 - p)
