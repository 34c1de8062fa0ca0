"""Readers for the artifacts the augmentation CLI leaves on disk.

The deep side never imports the feature toolkit; it consumes the same files
a person would: a class-per-directory image set, the ``fold_plan.json``
written next to an augmented export, and the export's ``manifest.tsv`` plus
``epoch_<e>/<class>/<stem>.png`` image tree.  Conventions mirror the
toolkit's: class indices follow sorted class names starting at 1, and a
directory-loaded sample id is ``<class>/<filename>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .runs import ScorerError

IMAGE_SUFFIXES = (".png", ".tif", ".tiff", ".jpg", ".jpeg", ".bmp")


@dataclass(frozen=True)
class FoldPlan:
    """Test-fold assignment of every sample id, as exported by the CLI."""

    k: int
    seed: int
    assignment: dict[str, int]

    def __post_init__(self):
        if self.k < 2:
            raise ScorerError(f"fold plans need k >= 2, got {self.k}")
        for sid, fold in self.assignment.items():
            if not 0 <= fold < self.k:
                raise ScorerError(f"sample {sid} assigned to fold {fold} outside [0, {self.k})")

    def test_ids(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f != fold)

    @classmethod
    def from_file(cls, path) -> "FoldPlan":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(int(payload["k"]), int(payload["seed"]),
                       {str(s): int(f) for s, f in payload["assignment"].items()})
        except (KeyError, TypeError, AttributeError, json.JSONDecodeError) as exc:
            raise ScorerError(f"{path}: malformed fold plan: {exc}") from exc


@dataclass(frozen=True)
class ManifestRow:
    epoch: int
    sample_id: str
    class_name: str


def read_manifest(path) -> tuple[ManifestRow, ...]:
    """Parse an export manifest; only the first three columns matter here."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("epoch\tsample_id\tclass"):
        raise ScorerError(f"{path}: not an augmentation manifest")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ScorerError(f"{path}:{ln}: expected >= 3 tab-separated fields")
        try:
            epoch = int(parts[0])
        except ValueError as exc:
            raise ScorerError(f"{path}:{ln}: bad epoch {parts[0]!r}") from exc
        rows.append(ManifestRow(epoch, parts[1], parts[2]))
    if not rows:
        raise ScorerError(f"{path}: empty manifest")
    return tuple(rows)


def manifest_epochs(rows) -> int:
    """Number of exported epochs; epochs must be 1..E with one consistent
    sample set throughout."""
    by_epoch: dict[int, set[str]] = {}
    for r in rows:
        by_epoch.setdefault(r.epoch, set()).add(r.sample_id)
    n = max(by_epoch)
    if sorted(by_epoch) != list(range(1, n + 1)):
        raise ScorerError(f"manifest epochs are not contiguous 1..{n}")
    ids = by_epoch[1]
    for e, got in by_epoch.items():
        if got != ids:
            raise ScorerError(f"epoch {e} covers a different sample set than epoch 1")
    return n


def manifest_classes(rows) -> tuple[str, ...]:
    return tuple(sorted({r.class_name for r in rows}))


def manifest_ids(rows) -> tuple[str, ...]:
    return tuple(sorted({r.sample_id for r in rows}))


def image_path(root, row: ManifestRow) -> Path:
    """Where the export put this row's augmented image."""
    stem = Path(row.sample_id).stem
    return Path(root) / f"epoch_{row.epoch}" / row.class_name / f"{stem}.png"


@dataclass(frozen=True)
class EvalSample:
    sample_id: str
    path: str
    label: int


def list_eval_samples(dataset_root) -> tuple[tuple[str, ...], tuple[EvalSample, ...]]:
    """Crawl a class-per-directory image set; returns (class names, samples).

    Labels are 1-based indices into the sorted class names, the same
    convention the score CSVs downstream expect.
    """
    root = Path(dataset_root)
    if not root.is_dir():
        raise ScorerError(f"dataset root {root} is not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise ScorerError(f"no class directories under {root}")
    class_names = tuple(d.name for d in class_dirs)
    samples = []
    for label, cdir in enumerate(class_dirs, start=1):
        for f in sorted(cdir.iterdir()):
            if f.is_file() and f.suffix.lower() in IMAGE_SUFFIXES:
                samples.append(EvalSample(f"{cdir.name}/{f.name}", str(f), label))
    if not samples:
        raise ScorerError(f"no image files under {root}")
    return class_names, tuple(samples)


def load_gray(path, side: int) -> np.ndarray:
    """Image file -> float32 grayscale array in [0, 1], resized to side**2."""
    img = Image.open(path).convert("L")
    if img.size != (side, side):
        img = img.resize((side, side), Image.BILINEAR)
    return np.asarray(img, dtype=np.float32) / 255.0


def standardize(a: np.ndarray) -> np.ndarray:
    """Per-image zero-mean unit-variance normalization."""
    return (a - a.mean()) / (a.std() + 1e-6)
