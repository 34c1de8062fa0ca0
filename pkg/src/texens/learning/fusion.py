"""Score-level fusion: z-score normalization and the sum rule.

Fusion must not depend on the order members are listed in, including when
earlier fusion results are fused again.  Every fused matrix therefore
remembers its normalized leaf members, and a fusion call flattens all
leaves, sorts them by provenance, and sums in that canonical order — the
same float operations in the same sequence, whatever the grouping.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class FusionError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreMatrix:
    """Decision values for a set of samples: one row per sample, one column
    per class (class order fixed by the dataset).  `provenance` names the
    member that produced the scores and keys the canonical fusion order."""

    values: np.ndarray
    sample_ids: tuple[str, ...]
    classes: tuple[str, ...]
    provenance: str = ""
    normalized: bool = False
    leaves: tuple = field(default=(), repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise FusionError("score matrix must be 2-D")
        if v.shape != (len(self.sample_ids), len(self.classes)):
            raise FusionError(
                f"{v.shape} values for {len(self.sample_ids)} samples x "
                f"{len(self.classes)} classes")
        if not np.all(np.isfinite(v)):
            raise FusionError("scores must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)


def zscore_normalize(sm: ScoreMatrix) -> ScoreMatrix:
    """Center and scale over all entries at once (sample standard
    deviation), so the normalized scores keep their within-row ordering."""
    v = sm.values
    if v.size < 2 or np.ptp(v) == 0.0:
        if np.ptp(v) == 0.0:
            warnings.warn(
                f"constant score matrix {sm.provenance!r}; normalizing to zeros",
                stacklevel=2)
        out = np.zeros_like(v)
    else:
        out = (v - v.mean()) / v.std(ddof=1)
    return ScoreMatrix(out, sm.sample_ids, sm.classes, sm.provenance,
                       normalized=True)


def _leaf_parts(sm: ScoreMatrix) -> list[tuple[str, np.ndarray]]:
    if sm.leaves:
        return list(sm.leaves)
    if sm.normalized:
        return [(sm.provenance, sm.values)]
    return [(sm.provenance, zscore_normalize(sm).values)]


def sum_rule_fuse(members: list[ScoreMatrix] | tuple[ScoreMatrix, ...],
                  provenance: str | None = None) -> ScoreMatrix:
    """Normalize each member once and add the results.

    Members must agree exactly on sample ids and class order; the first
    mismatch is a hard error rather than a silent reindex.  Feeding the same
    provenance twice (directly or through an already-fused member) is also
    an error, since it would double that member's weight unnoticed."""
    members = list(members)
    if not members:
        raise FusionError("nothing to fuse")
    first = members[0]
    for sm in members[1:]:
        if sm.sample_ids != first.sample_ids:
            raise FusionError(
                f"sample ids of {sm.provenance!r} do not match {first.provenance!r}")
        if sm.classes != first.classes:
            raise FusionError(
                f"class order of {sm.provenance!r} does not match {first.provenance!r}")

    parts: dict[str, np.ndarray] = {}
    for sm in members:
        for name, values in _leaf_parts(sm):
            if name in parts:
                raise FusionError(f"member {name!r} appears more than once")
            parts[name] = values

    ordered = sorted(parts.items())
    stacked = np.stack([v for _, v in ordered])
    fused = stacked.sum(axis=0)
    prov = provenance if provenance is not None else (
        "fuse(" + "+".join(name for name, _ in ordered) + ")")
    return ScoreMatrix(fused, first.sample_ids, first.classes, prov,
                       normalized=True, leaves=tuple(ordered))


def predict_labels(sm: ScoreMatrix) -> np.ndarray:
    """Winning class per row as 1-based labels; ties go to the lowest index."""
    return np.argmax(sm.values, axis=1) + 1


def accuracy(sm: ScoreMatrix, true_labels) -> float:
    true_labels = np.asarray(true_labels)
    if true_labels.shape != (sm.n_samples,):
        raise FusionError(
            f"{true_labels.shape} labels for {sm.n_samples} samples")
    return float((predict_labels(sm) == true_labels).mean())
