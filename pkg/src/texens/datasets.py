"""Datasets on disk (class-per-directory or TSV manifest) and stratified
cross-validation fold plans."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

IMAGE_SUFFIXES = (".png", ".tif", ".tiff", ".jpg", ".jpeg", ".bmp")


class DatasetError(ValueError):
    """Raised for malformed dataset layouts or fold plans."""


@dataclass(frozen=True)
class Sample:
    sample_id: str
    path: str
    label: int


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of labelled image paths.

    Samples are kept in a deterministic order (lexicographic by sample_id)
    so downstream indices are reproducible across runs and machines.
    """

    samples: tuple[Sample, ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        ids = [s.sample_id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise DatasetError("duplicate sample_id in dataset")
        if ids != sorted(ids):
            raise DatasetError("samples must be ordered by sample_id")

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def label_of(self, sample_id: str) -> int:
        for s in self.samples:
            if s.sample_id == sample_id:
                return s.label
        raise KeyError(sample_id)


def load_dataset(root) -> Dataset:
    """Load a dataset from `root`.

    With a `dataset.tsv` manifest (sample_id, relative path, class name per
    line, tab-separated), the manifest is authoritative.  Otherwise every
    direct subdirectory is a class and every recognised image file inside is
    a sample; sample_id is `<class>/<filename>`.  Class indices are assigned
    by sorted class name, starting at 1.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")

    manifest = root / "dataset.tsv"
    entries: list[tuple[str, str, str]] = []  # (sample_id, relpath, class_name)
    if manifest.is_file():
        for ln, line in enumerate(manifest.read_text().splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DatasetError(f"dataset.tsv line {ln}: expected 3 tab-separated fields")
            sid, rel, cname = parts
            if not (root / rel).is_file():
                raise DatasetError(f"dataset.tsv line {ln}: missing file {rel}")
            entries.append((sid, rel, cname))
    else:
        class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
        for cdir in class_dirs:
            for f in sorted(cdir.iterdir()):
                if f.is_file() and f.suffix.lower() in IMAGE_SUFFIXES:
                    entries.append((f"{cdir.name}/{f.name}", str(f.relative_to(root)), cdir.name))

    if not entries:
        raise DatasetError(f"no samples found under {root}")

    class_names = tuple(sorted({cname for _, _, cname in entries}))
    label_by_name = {c: i + 1 for i, c in enumerate(class_names)}

    counts = {c: 0 for c in class_names}
    for _, _, cname in entries:
        counts[cname] += 1
    empty = [c for c, k in counts.items() if k == 0]
    if empty:
        raise DatasetError(f"classes with no samples: {empty}")

    samples = tuple(
        Sample(sid, str(root / rel), label_by_name[cname])
        for sid, rel, cname in sorted(entries, key=lambda e: e[0])
    )
    return Dataset(samples, class_names)


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of each sample to exactly one of k folds (test membership).

    `assignment` maps sample_id -> fold index in [0, k)."""

    k: int
    seed: int
    assignment: dict[str, int]

    def __post_init__(self):
        if self.k < 2:
            raise DatasetError("fold plans need k >= 2")
        for sid, f in self.assignment.items():
            if not (0 <= f < self.k):
                raise DatasetError(f"sample {sid} assigned to fold {f} outside [0, {self.k})")

    def test_ids(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f != fold)

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for f in self.assignment.values():
            sizes[f] += 1
        return sizes

    def to_json(self) -> str:
        payload = {
            "k": self.k,
            "seed": self.seed,
            "assignment": {sid: self.assignment[sid] for sid in sorted(self.assignment)},
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        try:
            payload = json.loads(text)
            return cls(int(payload["k"]), int(payload["seed"]), {str(s): int(f) for s, f in payload["assignment"].items()})
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            if isinstance(exc, DatasetError):
                raise
            raise DatasetError(f"malformed fold plan: {exc}") from exc


def make_folds(dataset: Dataset, k: int, seed: int) -> FoldPlan:
    """Stratified k-fold plan.

    Each class is shuffled with its own seeded generator and dealt onto a
    fold counter that keeps running across classes, so per-class fold counts
    differ by at most one AND overall fold sizes differ by at most one.
    """
    if k < 2:
        raise DatasetError("k must be >= 2")
    by_class: dict[int, list[str]] = {}
    for s in dataset.samples:
        by_class.setdefault(s.label, []).append(s.sample_id)
    smallest = min(len(v) for v in by_class.values())
    if smallest < k:
        raise DatasetError(f"class with {smallest} samples cannot be split into {k} folds")

    assignment: dict[str, int] = {}
    cursor = 0
    for label in sorted(by_class):
        ids = sorted(by_class[label])
        rng = np.random.default_rng(np.random.SeedSequence([seed, label]))
        order = rng.permutation(len(ids))
        for idx in order:
            assignment[ids[idx]] = cursor % k
            cursor += 1
    return FoldPlan(k, seed, assignment)
