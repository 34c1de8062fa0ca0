"""Cross-validated evaluation of the descriptor ensemble.

Per fold, every ensemble member gets its own SVM on its own kernel; test
scores are fused per fold by the sum rule after z-score normalization.  On
color input the three channel copies of a member are fused into one member
first, and the result joins the cross-member fusion as a fresh matrix to be
normalized again.

The expensive histogram-intersection kernels are pairwise quantities, so
for members whose features do not depend on the fold they are computed once
over the whole dataset and sliced per fold.  Learned-filter members are the
exception: their banks come from training-fold patches, so their features
and kernels are rebuilt each fold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..datasets import Dataset, FoldPlan
from ..descriptors import (
    ExtractionContext,
    FH_PRIME_MEMBERS,
    bsif_learn_filters,
    extract_all,
    sample_patches,
)
from ..descriptors.bsif import FBSIF_SIZES
from ..images import ColorImage, as_gray, load_image
from .fusion import ScoreMatrix, accuracy, predict_labels, sum_rule_fuse
from .svm import histogram_intersection_kernel, linear_kernel, train_ova_on_kernel

LINEAR_FAMILIES = ("COL", "MOR")
DEFAULT_C = 100.0
PATCHES_PER_SIZE = 2000  # lower bound; at least 50 per filter weight


class ProtocolError(RuntimeError):
    pass


def member_family(tag: str) -> str:
    """'MLPQ[w=3,s=0.75,tau=0.2]@R' -> 'MLPQ'."""
    return tag.split("@")[0].split("[")[0]


def is_linear_member(tag: str) -> bool:
    return member_family(tag) in LINEAR_FAMILIES


def _default_provider(ds: Dataset):
    paths = {s.sample_id: s.path for s in ds.samples}
    cache: dict[str, object] = {}

    def provider(sample_id: str):
        if sample_id not in cache:
            cache[sample_id] = load_image(paths[sample_id])
        return cache[sample_id]

    return provider


def _feature_table(vectors_by_sample: list[dict]) -> dict[str, np.ndarray]:
    """Rows of per-sample FeatureVector dicts -> one matrix per tag."""
    if not vectors_by_sample:
        raise ProtocolError("no samples to tabulate")
    tags = [fv.tag for fvs in vectors_by_sample[0].values() for fv in fvs]
    rows_by_tag: dict[str, list[np.ndarray]] = {t: [] for t in tags}
    for row in vectors_by_sample:
        seen = []
        for fvs in row.values():
            for fv in fvs:
                if fv.tag not in rows_by_tag:
                    raise ProtocolError("inconsistent member tags across samples")
                seen.append(fv.tag)
                rows_by_tag[fv.tag].append(fv.values)
        if sorted(seen) != sorted(tags):
            raise ProtocolError("inconsistent member tags across samples")
    return {t: np.stack(rows_by_tag[t]) for t in tags}


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        std = x.std(axis=0)
        std = np.where(std == 0.0, 1.0, std)
        return cls(x.mean(axis=0), std)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


@dataclass(frozen=True)
class FoldModels:
    """Everything fitted on one training fold."""

    fold: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    ova: dict
    standardizers: dict
    bsif_banks: dict | None
    fold_features: dict  # tag -> feature matrix over all samples (bank members)


def _bank_seed(seed: int, fold: int, size: int) -> int:
    return int(np.random.SeedSequence([seed, fold, size]).generate_state(1)[0])


def _extract_features(ds: Dataset, provider, names, context=None) -> dict[str, np.ndarray]:
    per_sample = [extract_all(provider(s.sample_id), names, context)
                  for s in ds.samples]
    return _feature_table(per_sample)


def fit_fold(ds: Dataset, plan: FoldPlan, fold: int, provider, seed: int,
             members, features: dict[str, np.ndarray],
             kernels: dict[str, np.ndarray], c: float = DEFAULT_C,
             tol: float = 1e-3) -> FoldModels:
    """Train every member's classifier using training-fold data only.

    `provider` is called exclusively for training-fold sample ids (filter
    banks are learned from training patches); precomputed `features` and
    `kernels` cover the fold-independent members.
    """
    pos = {s.sample_id: i for i, s in enumerate(ds.samples)}
    train_idx = np.array([pos[i] for i in plan.train_ids(fold)])
    test_idx = np.array([pos[i] for i in plan.test_ids(fold)])
    labels = ds.labels

    banks = None
    fold_features: dict[str, np.ndarray] = {}
    if "fbsif" in members:
        train_gray = [as_gray(provider(i)) for i in plan.train_ids(fold)]
        banks = {}
        for size in FBSIF_SIZES:
            s = _bank_seed(seed, fold, size)
            count = max(PATCHES_PER_SIZE, 50 * size * size)
            patches = sample_patches(train_gray, size, count, seed=s)
            banks[size] = bsif_learn_filters(patches, size, 8, seed=s)

    ova = {}
    standardizers = {}
    y_train = labels[train_idx]

    for tag, x in features.items():
        if is_linear_member(tag):
            std = Standardizer.fit(x[train_idx])
            standardizers[tag] = std
            k_train = linear_kernel(std.apply(x[train_idx]))
        else:
            k_train = kernels[tag][np.ix_(train_idx, train_idx)]
        ova[tag] = train_ova_on_kernel(k_train, y_train, c=c, tol=tol)

    if banks is not None:
        # bank members: extract training features here, test features at
        # scoring time, so fitting never reads a test image
        ctx = ExtractionContext(banks)
        per_train = [extract_all(provider(i), ["fbsif"], ctx)
                     for i in plan.train_ids(fold)]
        train_table = _feature_table(per_train)
        for tag, x_train in train_table.items():
            fold_features[tag] = x_train
            k_train = histogram_intersection_kernel(x_train)
            ova[tag] = train_ova_on_kernel(k_train, y_train, c=c, tol=tol)

    return FoldModels(fold, train_idx, test_idx, ova, standardizers, banks,
                      fold_features)


def score_fold(ds: Dataset, plan: FoldPlan, models: FoldModels, provider,
               features: dict[str, np.ndarray],
               kernels: dict[str, np.ndarray]) -> dict[str, ScoreMatrix]:
    """Decision values of every member for the fold's test samples."""
    test_ids = tuple(plan.test_ids(models.fold))
    train_idx, test_idx = models.train_idx, models.test_idx
    out = {}
    for tag, x in features.items():
        if is_linear_member(tag):
            std = models.standardizers[tag]
            k_cross = linear_kernel(std.apply(x[test_idx]),
                                    std.apply(x[train_idx]))
        else:
            k_cross = kernels[tag][np.ix_(test_idx, train_idx)]
        values = models.ova[tag].decision_function(k_cross)
        out[tag] = ScoreMatrix(values, test_ids, ds.class_names, provenance=tag)

    if models.bsif_banks is not None:
        ctx = ExtractionContext(models.bsif_banks)
        per_test = [extract_all(provider(i), ["fbsif"], ctx) for i in test_ids]
        test_table = _feature_table(per_test)
        for tag, x_test in test_table.items():
            k_cross = histogram_intersection_kernel(x_test, models.fold_features[tag])
            values = models.ova[tag].decision_function(k_cross)
            out[tag] = ScoreMatrix(values, test_ids, ds.class_names, provenance=tag)
    return out


def fuse_fold(member_scores: dict[str, ScoreMatrix]) -> ScoreMatrix:
    """Channel-fuse per-channel copies of a member, then fuse across members."""
    by_base: dict[str, list[ScoreMatrix]] = {}
    for tag, sm in member_scores.items():
        base = tag.split("@")[0] if "@" in tag else tag
        by_base.setdefault(base, []).append(sm)

    top = []
    for base, group in sorted(by_base.items()):
        if len(group) == 1 and group[0].provenance == base:
            top.append(group[0])
        else:
            inner = sum_rule_fuse(group)
            top.append(ScoreMatrix(inner.values, inner.sample_ids, inner.classes,
                                   provenance=base))
    return sum_rule_fuse(top, provenance="ensemble")


@dataclass(frozen=True)
class EvalReport:
    """Cross-validated accuracies of every member and of the fused ensemble."""

    classes: tuple[str, ...]
    n_samples: int
    k: int
    fold_accuracies: tuple[float, ...]
    fused_accuracy: float
    member_accuracy: dict[str, float]
    predictions: dict[str, tuple[int, int]]  # sample_id -> (true, predicted)

    def best_member(self) -> tuple[str, float]:
        tag = max(sorted(self.member_accuracy), key=lambda t: self.member_accuracy[t])
        return tag, self.member_accuracy[tag]

    def confusion(self) -> list[list[int]]:
        """Fused-prediction confusion counts, true label by row."""
        n_cls = len(self.classes)
        counts = [[0] * n_cls for _ in range(n_cls)]
        for t, p in self.predictions.values():
            counts[t - 1][p - 1] += 1
        return counts

    def to_json(self) -> str:
        best_tag, best_acc = self.best_member()
        payload = {
            "classes": list(self.classes),
            "n_samples": self.n_samples,
            "k": self.k,
            "fold_accuracies": list(self.fold_accuracies),
            "fused_accuracy": self.fused_accuracy,
            "confusion": self.confusion(),
            "best_member": {"tag": best_tag, "accuracy": best_acc},
            "member_accuracy": dict(sorted(self.member_accuracy.items())),
            "predictions": {k: list(v) for k, v in sorted(self.predictions.items())},
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def run_protocol(ds: Dataset, plan: FoldPlan, seed: int = 0,
                 members=None, c: float = DEFAULT_C, tol: float = 1e-3,
                 image_provider=None, progress=None, score_sink=None) -> EvalReport:
    """Full k-fold evaluation of the requested ensemble members.

    `score_sink(fold, member_scores, fused)`, when given, receives the raw
    per-member and fused test-score matrices of every fold as they are
    produced, so callers can persist them for offline re-fusion.
    """
    provider = image_provider if image_provider is not None else _default_provider(ds)
    if not ds.samples:
        raise ProtocolError("empty dataset")
    is_color = isinstance(provider(ds.samples[0].sample_id), ColorImage)
    if members is None:
        members = tuple(m for m in FH_PRIME_MEMBERS if m != "col" or is_color)
    members = tuple(members)

    static_names = [m for m in members if m != "fbsif"]
    if progress:
        progress(f"extracting {len(static_names)} member families")
    features = _extract_features(ds, provider, static_names) if static_names else {}

    kernels = {}
    for tag, x in features.items():
        if not is_linear_member(tag):
            kernels[tag] = histogram_intersection_kernel(x)

    labels = ds.labels
    pos = {s.sample_id: i for i, s in enumerate(ds.samples)}
    member_rows: dict[str, dict[str, int]] = {}
    member_correct: dict[str, int] = {}
    fold_accs = []
    predictions: dict[str, tuple[int, int]] = {}

    for fold in range(plan.k):
        if progress:
            progress(f"fold {fold + 1}/{plan.k}")
        models = fit_fold(ds, plan, fold, provider, seed, members, features,
                          kernels, c=c, tol=tol)
        scores = score_fold(ds, plan, models, provider, features, kernels)

        test_ids = tuple(plan.test_ids(fold))
        y_true = labels[[pos[i] for i in test_ids]]
        for tag, sm in scores.items():
            member_correct[tag] = member_correct.get(tag, 0) + int(
                (predict_labels(sm) == y_true).sum())

        fused = fuse_fold(scores)
        if score_sink is not None:
            score_sink(fold, scores, fused)
        pred = predict_labels(fused)
        fold_accs.append(float((pred == y_true).mean()))
        for sid, t, p in zip(test_ids, y_true, pred):
            predictions[sid] = (int(t), int(p))

    n = len(ds.samples)
    member_accuracy = {t: member_correct[t] / n for t in member_correct}
    fused_accuracy = sum(1 for t, p in predictions.values() if t == p) / n
    return EvalReport(ds.class_names, n, plan.k, tuple(fold_accs),
                      float(fused_accuracy), member_accuracy, predictions)
