"""Training protocol for the fusion model.

Two phases, mirroring "features are extracted independently, then fused":

1. Each enabled deep backbone trains against the labels through a throwaway
   linear probe on its layer-normalized embedding (per-sample normalization
   keeps the probe stable while the backbone's output scale drifts).
2. Backbones freeze, per-segment standardization statistics are fitted on
   the train split, and the fusion head trains on the now-stationary fused
   inputs with Adam + the cosine schedule.

The per-epoch metrics log covers phase 2 (the fusion optimization).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus.generate import CorpusSample
from ..deep.cnn import CnnConfig, cnn_forward
from ..deep.vit import VitConfig, vit_forward
from ..errors import TrainingFailure
from ..forensic.vector import FORENSIC_DIM, forensic_vector
from ..media.frame import to_gray
from ..numerics import (
    CosineSchedule,
    Tensor,
    adam_step,
    backward,
    clip_global_norm,
    cosine_lr,
    init_adam,
    no_grad,
    ops,
)
from .augment import AugmentToggles, augment
from .model import AblationMask, FusionModel, Standardization


@dataclass
class TrainConfig:
    lr0: float = 1e-4
    eta_min: float = 1e-6
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    hidden: int = 64
    dropout: float = 0.5
    grad_clip: float = 10.0
    backbone_epochs: int | None = None  # defaults to `epochs`
    backbone_lr: float | None = None  # defaults to `lr0`
    augment: AugmentToggles = field(default_factory=AugmentToggles)
    ablation: AblationMask = field(default_factory=AblationMask)


@dataclass
class EpochRow:
    epoch: int
    lr: float
    train_loss: float
    val_loss: float
    train_acc: float
    val_acc: float


@dataclass
class TrainResult:
    model: FusionModel
    rows: list[EpochRow]
    best_epoch: int


CSV_HEADER = ["epoch", "lr", "train_loss", "val_loss", "train_acc", "val_acc"]


def write_metrics_csv(rows: list[EpochRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.epoch, repr(r.lr), r.train_loss, r.val_loss, r.train_acc, r.val_acc])


def model_dim_of(cnn_cfg: CnnConfig, vit_cfg: VitConfig) -> int:
    return FORENSIC_DIM + cnn_cfg.embed_dim + vit_cfg.dim


def sample_features(samples: list[CorpusSample]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cached luma planes, forensic vectors and integer labels."""
    grays = np.stack([to_gray(s.frame) for s in samples])
    forensic = np.stack([forensic_vector(s.frame) for s in samples])
    labels = np.array([s.y for s in samples], dtype=np.int64)
    return grays, forensic, labels


def _raw_rows(model: FusionModel, grays: np.ndarray, forensic: np.ndarray, chunk: int = 64) -> np.ndarray:
    """Unstandardized fused rows [forensic | cnn | vit] with current params."""
    n = grays.shape[0]
    cnn_rows = np.zeros((n, model.cnn_cfg.embed_dim))
    vit_rows = np.zeros((n, model.vit_cfg.dim))
    with no_grad():
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            x = Tensor(grays[lo:hi, None])
            if model.mask.cnn:
                emb, _ = cnn_forward(x, model.params, model.cnn_cfg)
                cnn_rows[lo:hi] = emb.data
            if model.mask.vit:
                vit_rows[lo:hi] = vit_forward(x, model.params, model.vit_cfg).data
    return np.concatenate([forensic, cnn_rows, vit_rows], axis=1)


def evaluate_split(model: FusionModel, grays, forensic, labels, chunk: int = 64):
    """(mean nll, accuracy, p_fake array) on clean features."""
    n = grays.shape[0]
    probs = np.zeros((n, 2))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        probs[lo:hi] = model.predict_batch(grays[lo:hi], forensic[lo:hi])
    p_true = np.clip(probs[np.arange(n), labels], 1e-300, None)
    nll = float(-np.log(p_true).mean())
    acc = float((probs.argmax(axis=1) == labels).mean())
    return nll, acc, probs[:, 1]


def _batch_standardize(emb: Tensor, eps: float = 1e-8) -> Tensor:
    """Per-coordinate batch standardization, differentiable through the stats.

    Batch statistics track the backbone's output drift during phase 1, so
    the probe always sees unit-scale inputs no matter how far the embedding
    distribution moves from its initialization.
    """
    mu = ops.mean(emb, axis=0, keepdims=True)
    cent = ops.sub(emb, mu)
    var = ops.mean(ops.mul(cent, cent), axis=0, keepdims=True)
    return ops.mul(cent, ops.powf(ops.add(var, Tensor(np.full((1, 1), eps))), -0.5))


def _train_backbone(
    branch: str,
    model: FusionModel,
    train_samples: list[CorpusSample],
    grays: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
) -> None:
    """Phase 1: optimize one backbone through a batch-standardized linear probe."""
    dim = model.cnn_cfg.embed_dim if branch == "cnn" else model.vit_cfg.dim
    rng = np.random.default_rng([config.seed, 41, 0 if branch == "cnn" else 1])
    probe = {
        "probe.w": Tensor(rng.normal(0.0, np.sqrt(2.0 / dim), size=(dim, 2)), requires_grad=True),
        "probe.b": Tensor(np.zeros(2), requires_grad=True),
    }
    keys = [k for k in model.params if k.startswith(branch + ".")]
    trainable = {k: model.params[k] for k in keys} | probe
    epochs = config.backbone_epochs or config.epochs
    lr0 = config.backbone_lr or config.lr0
    schedule = CosineSchedule(lr0=lr0, eta_min=min(config.eta_min, lr0 / 2), t_max=epochs)
    adam = init_adam(trainable, lr=lr0)
    n = len(train_samples)
    for epoch in range(epochs):
        lr = cosine_lr(schedule, epoch)
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            if config.augment.any:
                bg = np.stack(
                    [to_gray(augment(train_samples[i].frame, rng, config.augment)) for i in idx]
                )
            else:
                bg = grays[idx]
            x = Tensor(bg[:, None])
            if branch == "cnn":
                emb, _ = cnn_forward(x, model.params, model.cnn_cfg)
            else:
                emb = vit_forward(x, model.params, model.vit_cfg)
            normed = _batch_standardize(emb)
            logits = ops.add(ops.matmul(normed, probe["probe.w"]), probe["probe.b"])
            loss, _ = ops.softmax_cross_entropy(logits, labels[idx])
            if not np.isfinite(loss.item()):
                raise TrainingFailure(f"{branch} backbone diverged at epoch {epoch}", epoch=epoch)
            backward(loss)
            grads = {k: p.grad for k, p in trainable.items()}
            for p in trainable.values():
                p.clear_grad()
            clip_global_norm(grads, config.grad_clip)
            adam_step(trainable, grads, adam, lr=lr)


def train(
    train_samples: list[CorpusSample],
    val_samples: list[CorpusSample],
    config: TrainConfig,
    cnn_cfg: CnnConfig | None = None,
    vit_cfg: VitConfig | None = None,
) -> TrainResult:
    """Train per the two-phase protocol; keeps the best-val-loss parameters.

    Bit-reproducible for a fixed seed and config.
    """
    size = train_samples[0].frame.height
    cnn_cfg = cnn_cfg or CnnConfig(input_size=size)
    vit_cfg = vit_cfg or VitConfig(input_size=size)
    model = FusionModel(
        cnn_cfg=cnn_cfg,
        vit_cfg=vit_cfg,
        mask=config.ablation,
        hidden=config.hidden,
        dropout=config.dropout,
        seed=config.seed,
    )
    grays, forensic, labels = sample_features(train_samples)
    vgrays, vforensic, vlabels = sample_features(val_samples)

    # phase 1: deep branches learn against the labels, then freeze
    if config.ablation.cnn:
        _train_backbone("cnn", model, train_samples, grays, labels, config)
    if config.ablation.vit:
        _train_backbone("vit", model, train_samples, grays, labels, config)

    fdim, cdim = FORENSIC_DIM, cnn_cfg.embed_dim
    bounds = [(0, fdim), (fdim, fdim + cdim), (fdim + cdim, model_dim_of(cnn_cfg, vit_cfg))]
    model.stats = Standardization.fit(_raw_rows(model, grays, forensic), segments=bounds)

    # phase 2: fusion head on frozen features
    schedule = CosineSchedule(lr0=config.lr0, eta_min=config.eta_min, t_max=config.epochs)
    keys = [k for k in model.params if k.startswith("head.")]
    trainable = {k: model.params[k] for k in keys}
    adam = init_adam(trainable, lr=config.lr0)
    rng = np.random.default_rng([config.seed, 31])

    n = len(train_samples)
    cache_ok = not config.augment.any
    cached_rows = _raw_rows(model, grays, forensic) if cache_ok else None

    rows: list[EpochRow] = []
    best = (np.inf, -1, None)
    for epoch in range(config.epochs):
        lr = cosine_lr(schedule, epoch)
        order = rng.permutation(n)
        losses = []
        hits = 0
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            if cache_ok:
                z = model.stats.apply(cached_rows[idx])
                z = _mask_segments(z, model, bounds)
                logits = _head_forward(model, Tensor(z), training=True, rng=rng)
            else:
                frames = [augment(train_samples[i].frame, rng, config.augment) for i in idx]
                bg = np.stack([to_gray(f) for f in frames])
                bf = np.stack([forensic_vector(f) for f in frames])
                logits = model.forward(Tensor(bg[:, None]), bf, training=True, rng=rng)
            loss, probs = ops.softmax_cross_entropy(logits, labels[idx])
            lval = loss.item()
            if not np.isfinite(lval):
                raise TrainingFailure(f"fusion head diverged at epoch {epoch}", epoch=epoch)
            backward(loss)
            grads = {k: trainable[k].grad for k in keys}
            for p in trainable.values():
                p.clear_grad()
            clip_global_norm(grads, config.grad_clip)
            adam_step(trainable, grads, adam, lr=lr)
            losses.append(lval * len(idx))
            hits += int((probs.argmax(axis=1) == labels[idx]).sum())
        train_loss = float(np.sum(losses) / n)
        train_acc = hits / n
        val_loss, val_acc, _ = evaluate_split(model, vgrays, vforensic, vlabels)
        rows.append(EpochRow(epoch, lr, train_loss, val_loss, train_acc, val_acc))
        if val_loss < best[0]:
            best = (val_loss, epoch, {k: p.data.copy() for k, p in model.params.items()})

    if best[2] is not None:
        for k, data in best[2].items():
            model.params[k].data = data
    model.meta = {
        "families": sorted({s.family for s in train_samples if s.label == "fake"}),
        "epochs": config.epochs,
        "lr0": config.lr0,
        "seed": config.seed,
        "ablation": config.ablation.name,
        "best_epoch": best[1],
        "n_train": n,
    }
    return TrainResult(model=model, rows=rows, best_epoch=best[1])


def _mask_segments(z: np.ndarray, model: FusionModel, bounds) -> np.ndarray:
    enabled = (model.mask.forensic, model.mask.cnn, model.mask.vit)
    z = z.copy()
    for on, (lo, hi) in zip(enabled, bounds):
        if not on:
            z[:, lo:hi] = 0.0
    return z


def _head_forward(model: FusionModel, z: Tensor, training: bool, rng) -> Tensor:
    h = ops.relu(ops.add(ops.matmul(z, model.params["head.w1"]), model.params["head.b1"]))
    if training and model.dropout > 0.0:
        h = ops.mul(h, Tensor(ops.dropout_mask(h.shape, model.dropout, rng, training=True)))
    return ops.add(ops.matmul(h, model.params["head.w2"]), model.params["head.b2"])
