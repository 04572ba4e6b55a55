"""Corpus persistence: the on-disk layout and the external-corpus loader.

Layout:
    corpus/real/img_00000.png
    corpus/fake/img_00017.png
    corpus/masks/img_00017.png      8-bit grayscale, >127 = manipulated
    corpus/manifest.csv             path,label,family,seed
"""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import numpy as np

from ..errors import CorpusLoadError
from ..media.frame import decode_image, encode_image, Frame
from .generate import CorpusSample


def write_corpus(samples, root) -> Path:
    root = Path(root)
    (root / "real").mkdir(parents=True, exist_ok=True)
    (root / "fake").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    rows = []
    for i, s in enumerate(samples):
        name = f"img_{i:05d}.png"
        rel = f"{s.label}/{name}"
        encode_image(s.frame, root / rel)
        if s.label == "fake" and s.has_mask:
            encode_image(Frame(s.mask.astype(np.float64)[:, :, None]), root / "masks" / name)
        rows.append([rel, s.label, s.family, str(s.provenance.get("seed", ""))])
    with open(root / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label", "family", "seed"])
        writer.writerows(rows)
    return root


def _read_mask(path: Path) -> np.ndarray:
    mask_frame = decode_image(path)
    return mask_frame.pixels[:, :, 0] > (127.5 / 255.0)


def load_external(root) -> list[CorpusSample]:
    """Load a corpus directory; tolerant of missing masks, strict on layout."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusLoadError(f"corpus root {root} is not a directory", [str(root)])

    manifest = root / "manifest.csv"
    entries: list[tuple[str, str, str]] = []
    if manifest.exists():
        with open(manifest, newline="") as fh:
            for row in csv.DictReader(fh):
                entries.append((row["path"], row["label"], row.get("family", "")))
    else:
        for label in ("real", "fake"):
            sub = root / label
            if sub.is_dir():
                entries += [
                    (f"{label}/{p.name}", label, "") for p in sorted(sub.iterdir())
                ]
    if not entries:
        warnings.warn(f"corpus {root} is empty", stacklevel=2)
        return []

    samples = []
    bad: list[str] = []
    for rel, label, family in entries:
        path = root / rel
        if not path.exists():
            bad.append(str(path))
            continue
        if label not in ("real", "fake"):
            bad.append(f"{path} (label {label!r})")
            continue
        frame = decode_image(path)
        mask = np.zeros((frame.height, frame.width), dtype=bool)
        has_mask = label == "fake" and (root / "masks" / path.name).exists()
        if has_mask:
            mask = _read_mask(root / "masks" / path.name)
            if label == "fake" and not mask.any():
                raise CorpusLoadError(
                    f"fake sample {path} has an all-empty mask file",
                    [str(root / 'masks' / path.name)],
                )
        samples.append(
            CorpusSample(
                frame=frame,
                label=label,
                mask=mask,
                family=family or ("splice" if label == "fake" else "none"),
                provenance={"path": str(path)},
                has_mask=(label == "fake" and has_mask) or label == "real",
            )
        )
    if bad:
        raise CorpusLoadError(f"malformed corpus layout under {root}", bad)
    return samples
