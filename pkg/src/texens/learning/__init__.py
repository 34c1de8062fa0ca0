"""Kernel SVM ensemble learning: per-descriptor classifiers, score
normalization and sum-rule fusion, significance testing, and the
cross-validated evaluation protocol."""

from .fusion import (
    FusionError,
    ScoreMatrix,
    accuracy,
    predict_labels,
    sum_rule_fuse,
    zscore_normalize,
)
from .protocol import EvalReport, ProtocolError, run_protocol
from .svm import (
    BinarySvm,
    OvaSvm,
    SvmError,
    histogram_intersection_kernel,
    linear_kernel,
    smo_solve,
    svm_objective,
    train_ova_on_kernel,
)
from .wilcoxon import WilcoxonResult, wilcoxon_signed_rank

__all__ = [
    "BinarySvm",
    "EvalReport",
    "FusionError",
    "OvaSvm",
    "ProtocolError",
    "ScoreMatrix",
    "SvmError",
    "WilcoxonResult",
    "accuracy",
    "histogram_intersection_kernel",
    "linear_kernel",
    "predict_labels",
    "run_protocol",
    "smo_solve",
    "sum_rule_fuse",
    "svm_objective",
    "train_ova_on_kernel",
    "wilcoxon_signed_rank",
    "zscore_normalize",
]
