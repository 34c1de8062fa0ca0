"""Score CSVs: the exchange format between this package and external scorers.

Header ``sample_id,fold,true_label,score:<class1>,...,score:<classK>`` with
class columns in dataset order and scores printed to 9 significant digits.
Any tool that writes this schema (for instance a fine-tuned network
exporting its decision values) can have its scores fused with the
handcrafted members by the exact same normalize-and-sum machinery.
"""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..learning.fusion import ScoreMatrix, sum_rule_fuse
from .feature_files import format_score


class ScoreFileError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScoreTable:
    """Per-sample decision values plus the fold each sample was tested in."""

    sample_ids: tuple[str, ...]
    folds: np.ndarray
    true_labels: np.ndarray
    class_names: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        folds = np.asarray(self.folds, dtype=np.int64)
        labels = np.asarray(self.true_labels, dtype=np.int64)
        scores = np.asarray(self.scores, dtype=np.float64)
        n = len(self.sample_ids)
        if scores.shape != (n, len(self.class_names)):
            raise ScoreFileError(
                f"{scores.shape} scores for {n} samples x "
                f"{len(self.class_names)} classes")
        if folds.shape != (n,) or labels.shape != (n,):
            raise ScoreFileError("folds/labels do not match the sample count")
        if len(set(self.sample_ids)) != n:
            raise ScoreFileError("duplicate sample ids in score table")
        if not np.all(np.isfinite(scores)):
            raise ScoreFileError("scores must be finite")
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "folds", folds)
        object.__setattr__(self, "true_labels", labels)
        object.__setattr__(self, "scores", scores)

    def sorted_by_fold(self) -> "ScoreTable":
        """Canonical row order: by fold, then sample id."""
        order = sorted(range(len(self.sample_ids)),
                       key=lambda i: (int(self.folds[i]), self.sample_ids[i]))
        idx = np.array(order)
        return ScoreTable(tuple(self.sample_ids[i] for i in order),
                          self.folds[idx], self.true_labels[idx],
                          self.class_names, self.scores[idx])


def score_table_accuracy(table: ScoreTable) -> float:
    """Fraction of samples whose top-scoring class is the true label."""
    pred = np.argmax(table.scores, axis=1) + 1
    return float((pred == table.true_labels).mean())


def write_score_csv(path, table: ScoreTable) -> None:
    """Write rows in canonical (fold, sample id) order; byte-stable."""
    table = table.sorted_by_fold()
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample_id", "fold", "true_label"]
                    + [f"score:{c}" for c in table.class_names])
    for i, sid in enumerate(table.sample_ids):
        writer.writerow([sid, int(table.folds[i]), int(table.true_labels[i])]
                        + [format_score(v) for v in table.scores[i]])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_score_csv(path) -> ScoreTable:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ScoreFileError(f"{path}: empty file") from None
        if header[:3] != ["sample_id", "fold", "true_label"]:
            raise ScoreFileError(
                f"{path}: header must start with sample_id,fold,true_label")
        class_names = []
        for col, name in enumerate(header[3:], start=4):
            if not name.startswith("score:") or name == "score:":
                raise ScoreFileError(
                    f"{path}: column {col} ({name!r}) is not a score:<class> column")
            class_names.append(name[len("score:"):])
        if not class_names:
            raise ScoreFileError(f"{path}: no score columns")

        sample_ids, folds, labels, rows = [], [], [], []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise ScoreFileError(
                    f"{path}:{lineno}: {len(record)} fields, header has {len(header)}")
            sid = record[0]
            try:
                fold = int(record[1])
                label = int(record[2])
            except ValueError:
                raise ScoreFileError(
                    f"{path}:{lineno}: non-integer fold or label") from None
            try:
                scores = np.array([float(v) for v in record[3:]], dtype=np.float64)
            except ValueError:
                raise ScoreFileError(f"{path}:{lineno}: non-numeric score") from None
            sample_ids.append(sid)
            folds.append(fold)
            labels.append(label)
            rows.append(scores)
    if not rows:
        raise ScoreFileError(f"{path}: no score rows")
    try:
        return ScoreTable(tuple(sample_ids), np.array(folds), np.array(labels),
                          tuple(class_names), np.stack(rows))
    except ScoreFileError as exc:
        raise ScoreFileError(f"{path}: {exc}") from None


def _check_aligned(tables: list[ScoreTable], names: list[str]) -> None:
    first, first_name = tables[0], names[0]
    for table, name in zip(tables[1:], names[1:]):
        for col, (a, b) in enumerate(zip(first.class_names, table.class_names),
                                     start=1):
            if a != b:
                raise ScoreFileError(
                    f"class column {col} differs: {first_name!r} has {a!r}, "
                    f"{name!r} has {b!r}")
        if len(table.class_names) != len(first.class_names):
            raise ScoreFileError(
                f"{name!r} has {len(table.class_names)} score columns, "
                f"{first_name!r} has {len(first.class_names)}")
        known = set(table.sample_ids)
        for sid in first.sample_ids:
            if sid not in known:
                raise ScoreFileError(
                    f"sample {sid!r} from {first_name!r} missing in {name!r}")
        if len(table.sample_ids) != len(first.sample_ids):
            first_ids = set(first.sample_ids)
            extra = next(s for s in table.sample_ids if s not in first_ids)
            raise ScoreFileError(
                f"sample {extra!r} from {name!r} missing in {first_name!r}")
        fold_of = dict(zip(first.sample_ids, first.folds))
        label_of = dict(zip(first.sample_ids, first.true_labels))
        for i, sid in enumerate(table.sample_ids):
            if int(table.folds[i]) != int(fold_of[sid]):
                raise ScoreFileError(
                    f"sample {sid!r}: fold {int(table.folds[i])} in {name!r} "
                    f"but {int(fold_of[sid])} in {first_name!r}")
            if int(table.true_labels[i]) != int(label_of[sid]):
                raise ScoreFileError(
                    f"sample {sid!r}: true label {int(table.true_labels[i])} in "
                    f"{name!r} but {int(label_of[sid])} in {first_name!r}")


def fuse_score_tables(tables, names=None) -> ScoreTable:
    """Fuse score tables the same way the in-memory ensemble is fused.

    Rows are matched by sample id (input row order is irrelevant); scores
    are z-score normalized per member within each fold and summed.  All
    tables must cover the same samples with the same fold assignment and
    the same class columns, and the first disagreement found is reported
    by name.
    """
    tables = list(tables)
    if not tables:
        raise ScoreFileError("nothing to fuse")
    if names is None:
        names = [f"member{i}" for i in range(len(tables))]
    names = [str(n) for n in names]
    if len(names) != len(tables):
        raise ScoreFileError("one name per table required")
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise ScoreFileError(f"duplicate member name {dup!r}")
    _check_aligned(tables, names)

    canon = [t.sorted_by_fold() for t in tables]
    ref = canon[0]
    fold_values = sorted({int(f) for f in ref.folds})
    fused_rows, out_ids, out_folds, out_labels = [], [], [], []
    for fold in fold_values:
        mask = ref.folds == fold
        fold_ids = tuple(sid for sid, m in zip(ref.sample_ids, mask) if m)
        members = [ScoreMatrix(t.scores[t.folds == fold], fold_ids,
                               t.class_names, provenance=name)
                   for t, name in zip(canon, names)]
        fused = sum_rule_fuse(members, provenance="fused")
        fused_rows.append(fused.values)
        out_ids.extend(fold_ids)
        out_folds.extend([fold] * len(fold_ids))
        out_labels.extend(ref.true_labels[mask])
    return ScoreTable(tuple(out_ids), np.array(out_folds), np.array(out_labels),
                      ref.class_names, np.vstack(fused_rows))
