"""Member-level orchestration: one configuration across all folds.

A "member" is one TrainRun fine-tuned per cross-validation fold on that
fold's augmented export, with each fold's held-out samples scored by the
model that never saw them; the per-fold score rows concatenate into a
single CSV covering the whole set.  One process handles one run — sweeps
parallelize at the process level and share nothing but the filesystem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .data import FoldPlan, manifest_ids, read_manifest
from .runs import STATUS_CONVERGED, ScorerError, TrainRun
from .scores import fold_scores, write_score_csv
from .train import FinetuneResult, finetune


@dataclass(frozen=True)
class MemberResult:
    """One run's cross-validated outcome; csv_path is None when excluded."""

    run: TrainRun
    csv_path: Path | None
    fold_accuracies: tuple[float, ...]
    fold_results: tuple[FinetuneResult, ...] = field(repr=False, default=())


def _check_training_folds(aug_dir, plan: FoldPlan, fold: int) -> None:
    """An export used to train fold f must contain only f's training ids."""
    rows = read_manifest(Path(aug_dir) / "manifest.tsv")
    allowed = set(plan.train_ids(fold))
    leaked = [sid for sid in manifest_ids(rows) if sid not in allowed]
    if leaked:
        raise ScorerError(f"{aug_dir} holds non-training samples for fold "
                          f"{fold}: {leaked[:3]}")


def run_member(run: TrainRun, dataset_root, plan, fold_dirs,
               out_csv, checkpoint=None, cache_dir=None,
               max_batches_per_epoch: int | None = None) -> MemberResult:
    """Fine-tune `run` on every fold and write its score CSV.

    `fold_dirs` maps each fold index to that fold's augmented export.  If
    any fold's training is excluded the whole member is excluded: no CSV is
    written and the first failing status is recorded.
    """
    if not isinstance(plan, FoldPlan):
        plan = FoldPlan.from_file(plan)
    missing = [f for f in range(plan.k) if f not in fold_dirs]
    if missing:
        raise ScorerError(f"fold_dirs missing folds {missing}")

    rows_all = []
    accs = []
    results = []
    class_names = None
    for fold in range(plan.k):
        _check_training_folds(fold_dirs[fold], plan, fold)
        res = finetune(run, fold_dirs[fold], checkpoint=checkpoint,
                       cache_dir=cache_dir,
                       max_batches_per_epoch=max_batches_per_epoch)
        results.append(res)
        accs.append(res.train_accuracy)
        if res.run.status != STATUS_CONVERGED:
            return MemberResult(res.run, None, tuple(accs), tuple(results))
        if class_names is None:
            class_names = res.class_names
        elif res.class_names != class_names:
            raise ScorerError(f"fold {fold} trained on classes "
                              f"{res.class_names}, expected {class_names}")
        rows_all.extend(fold_scores(res.model, class_names, dataset_root,
                                    plan, fold))

    path = write_score_csv(out_csv, class_names, rows_all)
    return MemberResult(run.with_status(STATUS_CONVERGED), path,
                        tuple(accs), tuple(results))
