"""Plain-text feature tables, one file per descriptor configuration.

Layout: a header line ``# tag=<TAG>\tfingerprint=<12 hex>\tdim=<D>``
followed by one row per sample, ``sample_id<TAB>label<TAB>v0,v1,...`` with
values printed to 9 significant digits.  The fingerprint is the digest of
the descriptor's parameters, so readers can refuse to mix features that
were extracted under different settings.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class FeatureFileError(RuntimeError):
    pass


def format_score(v: float) -> str:
    """9-significant-digit text form shared by feature and score files."""
    return "%.9g" % v


@dataclass(frozen=True)
class FeatureTable:
    """One descriptor configuration's vectors for a whole dataset."""

    tag: str
    fingerprint: str
    sample_ids: tuple[str, ...]
    labels: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise FeatureFileError("feature values must be a 2-d matrix")
        if len(self.sample_ids) != values.shape[0] or labels.shape != (values.shape[0],):
            raise FeatureFileError("sample ids, labels and rows disagree in length")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise FeatureFileError("duplicate sample ids in feature table")
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def write_feature_file(path, table: FeatureTable) -> None:
    """Serialize a table; identical tables produce identical bytes."""
    path = Path(path)
    lines = [f"# tag={table.tag}\tfingerprint={table.fingerprint}\tdim={table.dim}"]
    for sid, label, row in zip(table.sample_ids, table.labels, table.values):
        if "\t" in sid or "\n" in sid:
            raise FeatureFileError(f"sample id {sid!r} contains a separator")
        vals = ",".join(format_score(v) for v in row)
        lines.append(f"{sid}\t{label}\t{vals}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_header(line: str, path: Path) -> tuple[str, str, int]:
    if not line.startswith("# "):
        raise FeatureFileError(f"{path}: missing header line")
    fields = {}
    for part in line[2:].split("\t"):
        if "=" not in part:
            raise FeatureFileError(f"{path}: malformed header field {part!r}")
        key, _, val = part.partition("=")
        fields[key] = val
    for key in ("tag", "fingerprint", "dim"):
        if key not in fields:
            raise FeatureFileError(f"{path}: header lacks {key!r}")
    try:
        dim = int(fields["dim"])
    except ValueError:
        raise FeatureFileError(f"{path}: non-integer dim {fields['dim']!r}") from None
    return fields["tag"], fields["fingerprint"], dim


def read_feature_header(path) -> tuple[str, str, int]:
    """(tag, fingerprint, dim) from the header line alone — cheap resume check."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if not first:
        raise FeatureFileError(f"{path}: empty file")
    return _parse_header(first, path)


def read_feature_file(path, expect_fingerprint: str | None = None) -> FeatureTable:
    """Parse a feature file, optionally insisting on a known fingerprint."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FeatureFileError(f"{path}: empty file")
    tag, fingerprint, dim = _parse_header(lines[0], path)
    if expect_fingerprint is not None and fingerprint != expect_fingerprint:
        raise FeatureFileError(
            f"{path}: fingerprint {fingerprint} does not match expected "
            f"{expect_fingerprint} (descriptor parameters changed?)")

    sample_ids, labels, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FeatureFileError(f"{path}:{lineno}: expected 3 tab-separated fields")
        sid, label_text, vals_text = parts
        try:
            label = int(label_text)
        except ValueError:
            raise FeatureFileError(
                f"{path}:{lineno}: non-integer label {label_text!r}") from None
        try:
            row = np.array([float(v) for v in vals_text.split(",")], dtype=np.float64)
        except ValueError:
            raise FeatureFileError(f"{path}:{lineno}: non-numeric feature value") from None
        if row.size != dim:
            raise FeatureFileError(
                f"{path}:{lineno}: {row.size} values, header promised {dim}")
        sample_ids.append(sid)
        labels.append(label)
        rows.append(row)
    if not rows:
        raise FeatureFileError(f"{path}: no sample rows")
    return FeatureTable(tag, fingerprint, tuple(sample_ids),
                        np.array(labels), np.stack(rows))
