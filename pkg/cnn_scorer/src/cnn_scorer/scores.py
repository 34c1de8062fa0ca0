"""Score-CSV export in the shared exchange schema.

Header ``sample_id,fold,true_label,score:<class1>,...``, class columns in
sorted-class order, values printed to nine significant digits, rows in
(fold, sample id) order — exactly the format the fusion command validates.
Scores are the raw pre-softmax outputs of the network: downstream fusion
z-scores every member anyway, and exporting logits avoids baking an extra
monotone nonlinearity into the stored artifact.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np
import torch

from .data import FoldPlan, list_eval_samples, load_gray, standardize
from .model import INPUT_SIDE
from .runs import ScorerError


def format_score(v: float) -> str:
    return "%.9g" % v


def write_score_csv(path, class_names, rows) -> Path:
    """Write (sample_id, fold, true_label, scores) rows canonically sorted."""
    path = Path(path)
    ordered = sorted(rows, key=lambda r: (r[1], r[0]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample_id", "fold", "true_label"]
                    + [f"score:{c}" for c in class_names])
    for sid, fold, label, scores in ordered:
        writer.writerow([sid, int(fold), int(label)]
                        + [format_score(v) for v in scores])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def fold_scores(model, class_names, dataset_root, plan: FoldPlan, fold: int,
                batch: int = 64, side: int = INPUT_SIDE) -> list:
    """Pre-softmax scores of every test-fold sample, one row per sample.

    The model's class order must match the dataset's (sorted class
    directories); a mismatch would silently permute score columns, so it is
    a hard error.  Training-fold samples are never scored.
    """
    if not 0 <= fold < plan.k:
        raise ScorerError(f"fold {fold} outside [0, {plan.k})")
    eval_classes, samples = list_eval_samples(dataset_root)
    if tuple(eval_classes) != tuple(class_names):
        raise ScorerError(f"class order mismatch: model trained on "
                          f"{tuple(class_names)}, dataset has {eval_classes}")
    by_id = {s.sample_id: s for s in samples}
    test = plan.test_ids(fold)
    missing = [sid for sid in test if sid not in by_id]
    if missing:
        raise ScorerError(f"fold plan names samples absent from the dataset: "
                          f"{missing[:3]}")

    torch.set_num_threads(1)
    model.eval()
    rows = []
    with torch.no_grad():
        for i in range(0, len(test), batch):
            chunk = test[i:i + batch]
            x = torch.from_numpy(np.stack(
                [standardize(load_gray(by_id[sid].path, side)) for sid in chunk]
            ))[:, None]
            logits = model(x).numpy().astype(np.float64)
            for sid, row in zip(chunk, logits):
                rows.append((sid, fold, by_id[sid].label, row))
    return rows


def export_scores(model, class_names, dataset_root, plan: FoldPlan, fold: int,
                  out_csv) -> Path:
    """Score one test fold and write it as a shared-schema CSV."""
    rows = fold_scores(model, class_names, dataset_root, plan, fold)
    return write_score_csv(out_csv, class_names, rows)


def score_csv_accuracy(path) -> float:
    """Top-1 accuracy of a shared-schema score CSV (sweep-summary helper)."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["sample_id", "fold", "true_label"]:
            raise ScorerError(f"{path}: not a score CSV")
        hits = total = 0
        for row in reader:
            scores = [float(v) for v in row[3:]]
            hits += int(scores.index(max(scores)) + 1 == int(row[2]))
            total += 1
    if total == 0:
        raise ScorerError(f"{path}: no score rows")
    return hits / total
