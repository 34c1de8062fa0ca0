"""Fine-tune a small pretrained CNN on augmented texture sets and export
score CSVs that fuse with handcrafted members through the toolkit CLI."""

from .data import (EvalSample, FoldPlan, ManifestRow, image_path,
                   list_eval_samples, load_gray, manifest_classes,
                   manifest_epochs, manifest_ids, read_manifest, standardize)
from .ensemble import DEFAULT_FUSE_CMD, ensemble_deep
from .model import (ARCHITECTURES, INPUT_SIDE, build_model, checkpoint_path,
                    checkpoint_pretext_accuracy, load_pretrained,
                    pretrained_checkpoint, replace_head)
from .runs import (APP_IDS, BATCH_SIZES, LEARNING_RATES, STATUS_CONVERGED,
                   STATUS_EXCLUDED_OOM, STATUS_EXCLUDED_RANDOM,
                   STATUS_PENDING, TERMINAL_STATUSES, ScorerError, TrainRun,
                   sweep_grid)
from .scores import (export_scores, fold_scores, format_score,
                     score_csv_accuracy, write_score_csv)
from .sweep import MemberResult, run_member
from .train import RANDOM_MARGIN, FinetuneResult, evaluate_accuracy, finetune

__version__ = "0.1.0"

__all__ = [
    "APP_IDS", "ARCHITECTURES", "BATCH_SIZES", "DEFAULT_FUSE_CMD",
    "EvalSample", "FinetuneResult", "FoldPlan", "INPUT_SIDE",
    "LEARNING_RATES", "ManifestRow", "MemberResult", "RANDOM_MARGIN",
    "STATUS_CONVERGED", "STATUS_EXCLUDED_OOM", "STATUS_EXCLUDED_RANDOM",
    "STATUS_PENDING", "ScorerError", "TERMINAL_STATUSES", "TrainRun",
    "build_model", "checkpoint_path", "checkpoint_pretext_accuracy",
    "ensemble_deep", "evaluate_accuracy", "export_scores", "finetune",
    "fold_scores", "format_score", "image_path", "list_eval_samples",
    "load_gray", "load_pretrained", "manifest_classes", "manifest_epochs",
    "manifest_ids", "pretrained_checkpoint", "read_manifest", "replace_head",
    "run_member", "score_csv_accuracy", "standardize", "sweep_grid",
    "write_score_csv",
]
