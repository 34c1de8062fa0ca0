"""Command-line front end.

Subcommands: ``extract`` (descriptor features to text files), ``augment``
(export augmented image sets), ``evaluate`` (cross-validated ensemble run
emitting a JSON report plus per-member score CSVs), ``fuse`` (offline
normalize-and-sum of score CSVs, including externally produced ones), and
``stats`` (signed-rank comparison of two reports).

Every flag has a config-file twin: an INI-style file with one section per
subcommand, ``key = value`` per line, selected with ``--config``; flags win
over the file.  Exit codes: 0 success, 2 usage, 3 data error, 4 numerical
failure.  Reports are byte-identical across reruns of the same
configuration; wall-clock details go to a separate sidecar file.
"""

from __future__ import annotations

import argparse
import configparser
import json
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .augmentation import (
    AugmentError,
    GeoError,
    LeakageError,
    PerturbError,
    TransformError,
    export_augmented,
)
from .datasets import DatasetError, FoldPlan, load_dataset, make_folds
from .descriptors import (
    DescriptorError,
    ExtractionContext,
    FH_PRIME_MEMBERS,
    IcaConvergenceError,
    bsif_learn_filters,
    descriptor_names,
    extract_all,
    sample_patches,
)
from .descriptors.bsif import FBSIF_SIZES
from .descriptors.common import config_fingerprint
from .images import ColorImage, ImageError, as_gray, load_image
from .io import (
    FeatureFileError,
    FeatureTable,
    ScoreFileError,
    ScoreTable,
    fuse_score_tables,
    read_feature_header,
    read_score_csv,
    score_table_accuracy,
    write_feature_file,
    write_score_csv,
)
from .io.feature_files import format_score
from .learning import ProtocolError, run_protocol, wilcoxon_signed_rank
from .learning.fusion import FusionError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_REQUIRED = object()


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# ------------------------------------------------------------- option merge

def _load_config_section(path: str, section: str) -> dict:
    cp = configparser.ConfigParser()
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        cp.read_string(p.read_text(encoding="utf-8"), source=str(p))
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from None
    return dict(cp[section]) if cp.has_section(section) else {}


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


class _Options:
    """Flag > config-file key > default, with required-ness enforced."""

    def __init__(self, args: argparse.Namespace, command: str):
        self._args = args
        self._cfg = (_load_config_section(args.config, command)
                     if getattr(args, "config", None) else {})

    def get(self, name: str, conv=str, default=_REQUIRED):
        flag_value = getattr(self._args, name)
        if flag_value is not None:
            return flag_value
        if name in self._cfg:
            try:
                return conv(self._cfg[name])
            except ValueError as exc:
                raise UsageError(f"config key {name!r}: {exc}") from None
        if default is _REQUIRED:
            raise UsageError(
                f"missing --{name.replace('_', '-')} (no flag, no config key)")
        return default


def _safe_name(tag: str) -> str:
    return re.sub(r"[^A-Za-z0-9.@=-]+", "_", tag).strip("_")


def _check_descriptor_names(names) -> None:
    valid = descriptor_names()
    unknown = [n for n in names if n not in valid]
    if unknown:
        raise UsageError(
            f"unknown descriptor(s) {', '.join(unknown)}; valid: {', '.join(valid)}")


def _tabulate(per_sample: list[dict]) -> dict[str, tuple[str, np.ndarray]]:
    """Per-sample extraction dicts -> {tag: (fingerprint, matrix)}."""
    order: list[str] = []
    fingerprints: dict[str, str] = {}
    rows: dict[str, list[np.ndarray]] = {}
    for fvs in per_sample[0].values():
        for fv in fvs:
            order.append(fv.tag)
            fingerprints[fv.tag] = fv.config
            rows[fv.tag] = []
    for row in per_sample:
        for fvs in row.values():
            for fv in fvs:
                if fv.tag not in rows:
                    raise DataError("inconsistent descriptor tags across samples")
                rows[fv.tag].append(fv.values)
    return {t: (fingerprints[t], np.stack(rows[t])) for t in order}


# ---------------------------------------------------------------- commands

def cmd_extract(args: argparse.Namespace) -> int:
    opts = _Options(args, "extract")
    dataset = opts.get("dataset")
    out = Path(opts.get("out"))
    names = opts.get("descriptors", _csv_list)
    seed = opts.get("seed", int, 0)
    force = bool(opts.get("force", _to_bool, False))
    _check_descriptor_names(names)

    ds = load_dataset(dataset)
    images = {s.sample_id: load_image(s.path) for s in ds.samples}
    first_id = ds.samples[0].sample_id

    context = None
    if "fbsif" in names:
        gray = [as_gray(images[s.sample_id]) for s in ds.samples]
        banks = {}
        for size in FBSIF_SIZES:
            bank_seed = int(np.random.SeedSequence([seed, size]).generate_state(1)[0])
            count = max(2000, 50 * size * size)
            patches = sample_patches(gray, size, count, seed=bank_seed)
            banks[size] = bsif_learn_filters(patches, size, 8, seed=bank_seed)
        context = ExtractionContext(banks)

    out.mkdir(parents=True, exist_ok=True)
    written = skipped = 0
    for name in names:
        probe = extract_all(images[first_id], [name], context)
        expected = [(fv.tag, fv.config) for fvs in probe.values() for fv in fvs]

        pending = []
        for tag, fingerprint in expected:
            path = out / (_safe_name(tag) + ".tsv")
            if path.is_file():
                _, existing, _ = read_feature_header(path)
                if existing == fingerprint:
                    skipped += 1
                    continue
                if not force:
                    raise DataError(
                        f"{path}: existing fingerprint {existing} does not match "
                        f"{fingerprint} (parameters changed); use --force to overwrite")
            pending.append((tag, fingerprint, path))
        if not pending:
            print(f"{name}: up to date ({len(expected)} file(s))")
            continue

        per_sample = [probe] + [extract_all(images[s.sample_id], [name], context)
                                for s in ds.samples[1:]]
        tables = _tabulate(per_sample)
        ids = tuple(s.sample_id for s in ds.samples)
        for tag, fingerprint, path in pending:
            _, matrix = tables[tag]
            write_feature_file(path, FeatureTable(tag, fingerprint, ids,
                                                  ds.labels, matrix))
            written += 1
        print(f"{name}: wrote {len(pending)} file(s)")
    print(f"extract: {written} written, {skipped} up to date -> {out}")
    return EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    opts = _Options(args, "augment")
    dataset = opts.get("dataset")
    out = Path(opts.get("out"))
    app = opts.get("app", int)
    epochs = opts.get("epochs", int, 1)
    seed = opts.get("seed", int)
    method = opts.get("method", str, None)
    k = opts.get("k", int, None)
    fold = opts.get("fold", int, None)
    plan_path = opts.get("plan", str, None)

    if app not in (1, 2, 3, 4, 5, 6):
        raise UsageError(f"--app must be 1..6, got {app}")
    if app == 6 and method not in ("one", "two", "three"):
        raise UsageError("--app 6 needs --method one|two|three")
    if app != 6 and method is not None:
        raise UsageError("--method only applies to --app 6")
    if epochs < 1:
        raise UsageError("--epochs must be >= 1")
    if plan_path is not None and k is not None:
        raise UsageError("--plan and --k are mutually exclusive")
    if (k is not None or plan_path is not None) and fold is None:
        raise UsageError("--fold required when restricting to training folds")
    if fold is not None and k is None and plan_path is None:
        raise UsageError("--fold needs --k or --plan")

    ds = load_dataset(dataset)
    plan = None
    if plan_path is not None:
        plan = FoldPlan.from_json(Path(plan_path).read_text(encoding="utf-8"))
    elif k is not None:
        plan = make_folds(ds, k, seed)

    out.mkdir(parents=True, exist_ok=True)
    if plan is not None:
        (out / "fold_plan.json").write_text(plan.to_json(), encoding="utf-8")
    manifest = export_augmented(ds, app, epochs, seed, out, plan=plan,
                                fold=fold, method=method)
    print(f"augment: app {app}, {epochs} epoch(s) -> {out}")
    print(f"manifest: {manifest}")
    return EXIT_OK


def _resolve_members(opts: _Options, ds, provider) -> tuple[str, ...]:
    members = opts.get("members", _csv_list, None)
    ensemble = opts.get("ensemble", str, None)
    if members is not None and ensemble is not None:
        raise UsageError("--members and --ensemble are mutually exclusive")
    if members is not None:
        _check_descriptor_names(members)
        return tuple(members)
    if ensemble not in (None, "fh-prime"):
        raise UsageError(f"unknown ensemble {ensemble!r}; known: fh-prime")
    is_color = isinstance(provider(ds.samples[0].sample_id), ColorImage)
    return tuple(m for m in FH_PRIME_MEMBERS if m != "col" or is_color)


def cmd_evaluate(args: argparse.Namespace) -> int:
    opts = _Options(args, "evaluate")
    dataset = opts.get("dataset")
    out = Path(opts.get("out"))
    seed = opts.get("seed", int)
    k = opts.get("k", int)
    c = opts.get("c", float, 100.0)
    tol = opts.get("tol", float, 1e-3)
    quiet = bool(opts.get("quiet", _to_bool, False))

    started = time.time()
    ds = load_dataset(dataset)
    image_cache: dict[str, object] = {}
    paths = {s.sample_id: s.path for s in ds.samples}

    def provider(sample_id: str):
        if sample_id not in image_cache:
            image_cache[sample_id] = load_image(paths[sample_id])
        return image_cache[sample_id]

    members = _resolve_members(opts, ds, provider)
    plan = make_folds(ds, k, seed)
    label_of = {s.sample_id: s.label for s in ds.samples}

    collected: dict[str, list] = {}
    fused_parts: list = []

    def sink(fold: int, member_scores: dict, fused) -> None:
        for tag, sm in member_scores.items():
            collected.setdefault(tag, []).append((fold, sm))
        fused_parts.append((fold, fused))

    progress = None if quiet else (lambda msg: print(msg, file=sys.stderr))
    report = run_protocol(ds, plan, seed=seed, members=members, c=c, tol=tol,
                          image_provider=provider, progress=progress,
                          score_sink=sink)

    def to_table(parts) -> ScoreTable:
        ids, folds, labels, blocks = [], [], [], []
        for fold, sm in parts:
            ids.extend(sm.sample_ids)
            folds.extend([fold] * len(sm.sample_ids))
            labels.extend(label_of[i] for i in sm.sample_ids)
            blocks.append(sm.values)
        return ScoreTable(tuple(ids), np.array(folds), np.array(labels),
                          ds.class_names, np.vstack(blocks))

    scores_dir = out / "scores"
    scores_dir.mkdir(parents=True, exist_ok=True)
    score_files = []
    for tag in sorted(collected):
        rel = f"scores/{_safe_name(tag)}.csv"
        write_score_csv(out / rel, to_table(collected[tag]))
        score_files.append(rel)
    write_score_csv(scores_dir / "fused.csv", to_table(fused_parts))
    score_files.append("scores/fused.csv")

    config = {
        "c": c,
        "dataset": str(dataset),
        "k": k,
        "members": list(members),
        "seed": seed,
        "tol": tol,
    }
    payload = json.loads(report.to_json())
    payload["config"] = config
    payload["config_fingerprint"] = config_fingerprint(**config)
    payload["score_files"] = score_files
    payload["version"] = __version__
    report_path = out / "report.json"
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    meta = {"started": started, "finished": time.time(),
            "duration_s": round(time.time() - started, 3)}
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n",
                                       encoding="utf-8")

    print(f"fused accuracy: {format_score(report.fused_accuracy)}")
    best_tag, best_acc = report.best_member()
    print(f"best member: {best_tag} ({format_score(best_acc)})")
    print(f"report: {report_path}")
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace) -> int:
    opts = _Options(args, "fuse")
    out = Path(opts.get("out"))
    csv_paths = [Path(p) for p in args.scores]
    if not csv_paths:
        raise UsageError("at least one score CSV required")

    names = []
    for i, path in enumerate(csv_paths):
        stem = path.stem
        names.append(stem if stem not in names else f"{stem}#{i}")
    tables = [read_score_csv(p) for p in csv_paths]
    fused = fuse_score_tables(tables, names=names)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_score_csv(out, fused)
    print(f"fused {len(tables)} member(s), {len(fused.sample_ids)} samples")
    print(f"accuracy: {format_score(score_table_accuracy(fused))}")
    print(f"out: {out}")
    return EXIT_OK


def _fold_accuracies(path: Path) -> list[float]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    if isinstance(payload, dict):
        if "fold_accuracies" not in payload:
            raise DataError(f"{path}: no 'fold_accuracies' key")
        values = payload["fold_accuracies"]
    elif isinstance(payload, list):
        values = payload
    else:
        raise DataError(f"{path}: expected a report object or a list")
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError):
        raise DataError(f"{path}: fold accuracies must be numbers") from None


def cmd_stats(args: argparse.Namespace) -> int:
    a = _fold_accuracies(Path(args.report_a))
    b = _fold_accuracies(Path(args.report_b))
    if len(a) != len(b):
        raise DataError(
            f"length mismatch: {len(a)} accuracies vs {len(b)}")
    result = wilcoxon_signed_rank(np.array(a) - np.array(b))
    if result.n_effective < 5:
        print(f"warning: only {result.n_effective} non-zero difference(s); "
              "the test has little power", file=sys.stderr)
    print(f"n: {result.n_effective}")
    print(f"statistic: {format_score(result.statistic)}")
    print(f"p: {format_score(result.p_value)}")
    print(f"method: {result.method}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="texens",
        description="Texture-descriptor ensembles, augmentation export, "
                    "score fusion and evaluation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file; flags override it")

    p = sub.add_parser("extract", help="write one feature file per "
                                       "descriptor configuration")
    common(p)
    p.add_argument("--dataset", help="dataset root (class-per-directory)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--descriptors", type=_csv_list,
                   help="comma-separated descriptor names")
    p.add_argument("--seed", type=int, help="filter-learning seed (default 0)")
    p.add_argument("--force", action="store_const", const=True,
                   help="overwrite files whose fingerprint changed")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("augment", help="export augmented image sets")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--out")
    p.add_argument("--app", type=int, help="augmentation protocol 1..6")
    p.add_argument("--epochs", type=int, help="augmented copies per image")
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=("one", "two", "three"),
                   help="subspace perturbation for --app 6")
    p.add_argument("--k", type=int, help="make a k-fold plan and restrict "
                                         "to one training fold")
    p.add_argument("--fold", type=int, help="training fold to export")
    p.add_argument("--plan", help="existing fold-plan JSON")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("evaluate", help="cross-validated ensemble evaluation")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int, help="number of folds")
    p.add_argument("--members", type=_csv_list,
                   help="explicit comma-separated member list")
    p.add_argument("--ensemble", help="named ensemble (fh-prime)")
    p.add_argument("--c", type=float, help="SVM regularization (default 100)")
    p.add_argument("--tol", type=float, help="SVM stop tolerance (default 1e-3)")
    p.add_argument("--quiet", action="store_const", const=True,
                   help="suppress per-fold progress on stderr")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fuse", help="normalize and sum score CSVs")
    common(p)
    p.add_argument("scores", nargs="+", help="score CSV paths")
    p.add_argument("--out", help="fused CSV path")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("stats", help="signed-rank comparison of two reports")
    common(p)
    p.add_argument("report_a", help="report JSON (or JSON list of accuracies)")
    p.add_argument("report_b")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IcaConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, DatasetError, DescriptorError, FeatureFileError,
            ScoreFileError, FusionError, ProtocolError, AugmentError,
            GeoError, PerturbError, TransformError, LeakageError, ImageError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
