"""Robustness harness: compression sweep, single-step sign attack, feature
ablation tables and unseen-family generalization."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus.generate import CorpusConfig, CorpusSample, make_corpus
from .errors import ContractError, LeakageError, ParameterError, StateError
from .fusion.model import FusionModel
from .fusion.split import stratified_split
from .fusion.train import TrainConfig, evaluate_split, sample_features, train
from .media.frame import Frame, LUMA_WEIGHTS, to_gray
from .media.jpeg import JpegConfig, jpeg_round_trip
from .metrics import classification_metrics, confusion_from_scores, roc_auc
from .numerics import GRAD_LOCK, Tensor, backward, default_tape, ops


@dataclass
class RobustnessRun:
    condition: str
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None
    auc: float
    n: int

    def as_row(self) -> list:
        fmt = lambda v: "" if v is None else f"{v:.4f}"
        return [self.condition, f"{self.accuracy:.4f}", fmt(self.precision), fmt(self.recall), fmt(self.f1), f"{self.auc:.4f}", self.n]


TABLE_HEADER = ["condition", "accuracy", "precision", "recall", "f1", "auc", "n"]


def write_table_csv(runs: list[RobustnessRun], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_HEADER)
        for r in runs:
            w.writerow(r.as_row())


def evaluate_detector(model: FusionModel, samples: list[CorpusSample], condition: str = "baseline") -> RobustnessRun:
    """Full metric row (threshold 0.5 for counts, swept AUC) on a sample list."""
    grays, forensic, labels = sample_features(samples)
    _, _, p_fake = evaluate_split(model, grays, forensic, labels)
    counts = confusion_from_scores(p_fake, labels)
    m = classification_metrics(counts)
    _, auc = roc_auc(p_fake, labels)
    return RobustnessRun(condition, m.accuracy, m.precision, m.recall, m.f1, auc, len(samples))


def fgsm_attack(frame: Frame, model: FusionModel, label: int, epsilon: float = 0.01) -> Frame:
    """x' = clamp(x + eps * sign(d loss / d x)) through the differentiable branches.

    The forensic segment is constant w.r.t. pixels, so a forensic-only model
    yields a zero gradient and the frame comes back unchanged.
    """
    if model.stats is None:
        raise StateError("fgsm_attack needs a trained model")
    if epsilon < 0:
        raise ParameterError("epsilon must be >= 0")
    from .forensic.vector import forensic_vector

    gray = to_gray(frame)
    fvec = forensic_vector(frame)
    with GRAD_LOCK:
        default_tape().clear()
        x = Tensor(gray[None, None], requires_grad=True)
        logits = model.forward(x, fvec[None], training=False)
        loss, _ = ops.softmax_cross_entropy(logits, [int(label)])
        backward(loss)
        g = np.zeros_like(gray) if x.grad is None else x.grad[0, 0]
        for p in model.params.values():
            p.clear_grad()
    if frame.channels == 3:
        grad_rgb = g[:, :, None] * LUMA_WEIGHTS[None, None, :]
    else:
        grad_rgb = g[:, :, None]
    perturbed = np.clip(frame.pixels + epsilon * np.sign(grad_rgb), 0.0, 1.0)
    return Frame(perturbed, frame.source_timestamp_s)


def attack_samples(model: FusionModel, samples: list[CorpusSample], epsilon: float = 0.01) -> list[CorpusSample]:
    out = []
    for s in samples:
        adv = fgsm_attack(s.frame, model, s.y, epsilon)
        out.append(
            CorpusSample(
                frame=adv, label=s.label, mask=s.mask, family=s.family,
                provenance=dict(s.provenance, fgsm_epsilon=epsilon), has_mask=s.has_mask,
            )
        )
    return out


def compression_sweep(
    model: FusionModel, samples: list[CorpusSample], qfs=(100, 75, 50)
) -> list[RobustnessRun]:
    """Re-encode the evaluation set at each quality factor and re-score."""
    runs = []
    for qf in qfs:
        recoded = [
            CorpusSample(
                frame=jpeg_round_trip(s.frame, JpegConfig(qf)),
                label=s.label, mask=s.mask, family=s.family,
                provenance=dict(s.provenance, sweep_qf=qf), has_mask=s.has_mask,
            )
            for s in samples
        ]
        runs.append(evaluate_detector(model, recoded, condition=f"qf={qf}"))
    return runs


def generalization_eval(model: FusionModel, samples: list[CorpusSample], family: str) -> RobustnessRun:
    """Metric row on reals + fakes of a family the model never trained on."""
    trained = model.meta.get("families", [])
    if family in trained:
        raise LeakageError(f"family {family!r} was present in the training corpus")
    fakes = [s for s in samples if s.label == "fake"]
    if not fakes:
        raise ContractError(f"no fake samples of family {family!r} to evaluate")
    stray = {s.family for s in fakes} - {family}
    if stray:
        raise ParameterError(f"evaluation set mixes families: {sorted(stray)}")
    if not any(s.label == "real" for s in samples):
        raise ContractError("generalization evaluation needs real samples too")
    return evaluate_detector(model, samples, condition=f"family={family}")


@dataclass
class AblationResult:
    rows: list[RobustnessRun]


def ablation_run(corpus_config: CorpusConfig, train_config: TrainConfig) -> AblationResult:
    """Feature-segment ablation rows plus the preprocessing (artifact
    preservation) toggle, each trained and evaluated at the same seed."""
    from .fusion.model import AblationMask

    def run_on(samples, mask: AblationMask, condition: str) -> RobustnessRun:
        labels = [s.y for s in samples]
        split = stratified_split(labels, seed=train_config.seed)
        tr = [samples[i] for i in split.indices("train")]
        va = [samples[i] for i in split.indices("val")]
        te = [samples[i] for i in split.indices("test")]
        cfg = TrainConfig(**{**vars(train_config), "ablation": mask})
        result = train(tr, va, cfg)
        row = evaluate_detector(result.model, te, condition=condition)
        return row

    samples = make_corpus(corpus_config)
    rows = [
        run_on(samples, AblationMask(forensic=True, cnn=False, vit=False), "features=forensic-only"),
        run_on(samples, AblationMask(forensic=False, cnn=True, vit=False), "features=cnn-only"),
        run_on(samples, AblationMask(forensic=False, cnn=False, vit=True), "features=vit-only"),
        run_on(samples, AblationMask(), "features=hybrid"),
    ]
    # preprocessing toggle: regenerate without the artifact-preserving pass
    raw_cfg = CorpusConfig(**{**vars(corpus_config), "qf_authentic": 100, "qf_donor": 99})
    raw_samples = make_corpus(raw_cfg)
    rows.append(run_on(raw_samples, AblationMask(), "preprocess=no-artifact-preservation"))
    rows.append(run_on(samples, AblationMask(), "preprocess=artifact-preserving"))
    return AblationResult(rows=rows)
