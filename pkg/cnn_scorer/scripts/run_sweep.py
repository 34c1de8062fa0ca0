#!/usr/bin/env python3
"""Sweep the small backbone across augmentation apps and fuse the survivors.

For every requested app this script asks the toolkit CLI to export per-fold
augmented training sets (reusing exports that already exist), fine-tunes one
run per fold, writes the run's score CSV, and finally hands all converged
members to the fuse command.  Excluded runs are reported and dropped.

Example:
    python3 scripts/run_sweep.py --dataset toy/data --workdir toy/deep \
        --apps 1,3,6 --epochs 8
"""

import argparse
import shutil
import subprocess
import sys
from pathlib import Path

from cnn_scorer import (TrainRun, ensemble_deep, run_member,
                        score_csv_accuracy)


def texens(*argv) -> None:
    cmd = [sys.executable, "-m", "texens.cli", *[str(a) for a in argv]]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise SystemExit(f"toolkit command failed ({proc.returncode}):\n{proc.stderr}")


def ensure_exports(args, workdir: Path) -> tuple[Path, dict[int, dict[int, Path]]]:
    """Per-(app, fold) augmented exports; returns (plan path, app -> fold -> dir)."""
    plan = workdir / "fold_plan.json"
    apps = [int(a) for a in args.apps.split(",")]
    dirs: dict[int, dict[int, Path]] = {}
    for app in apps:
        dirs[app] = {}
        for fold in range(args.k):
            out = workdir / f"app{app}_fold{fold}"
            dirs[app][fold] = out
            if (out / "manifest.tsv").is_file():
                continue
            cmd = ["augment", "--dataset", args.dataset, "--out", out,
                   "--app", app, "--epochs", args.epochs, "--seed", args.seed,
                   "--fold", fold]
            if app == 6:
                cmd += ["--method", args.method]
            if plan.is_file():
                cmd += ["--plan", plan]
            else:
                cmd += ["--k", args.k]
            texens(*cmd)
            if not plan.is_file():
                shutil.copy(out / "fold_plan.json", plan)
    if not plan.is_file():
        raise SystemExit(f"{plan} missing; delete the exports and rerun")
    return plan, dirs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", required=True, help="class-per-directory image set")
    ap.add_argument("--workdir", required=True, help="exports, scores, fused CSV")
    ap.add_argument("--apps", default="1", help="comma-separated app ids (1..6)")
    ap.add_argument("--lr", type=float, default=0.001)
    ap.add_argument("--batch", type=int, default=10)
    ap.add_argument("--epochs", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k", type=int, default=3, help="number of folds")
    ap.add_argument("--method", default="one",
                    help="app-6 coefficient method (one|two|three)")
    args = ap.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    plan, dirs = ensure_exports(args, workdir)

    members = []
    for app, fold_dirs in dirs.items():
        run = TrainRun(app=app, lr=args.lr, batch=args.batch,
                       epochs=args.epochs, seed=args.seed)
        member = run_member(run, args.dataset, plan, fold_dirs,
                            workdir / "scores" / f"{run.run_id}.csv")
        members.append(member)
        accs = " ".join(f"{a:.3f}" for a in member.fold_accuracies)
        line = f"{run.run_id}: {member.run.status} (train acc {accs})"
        if member.csv_path is not None:
            line += f" -> test acc {score_csv_accuracy(member.csv_path):.4f}"
        print(line)

    fused = ensemble_deep(members, workdir / "fused.csv")
    print(f"\nfused {sum(m.run.converged for m in members)} member(s): "
          f"accuracy {score_csv_accuracy(fused):.4f}")
    print(f"out: {fused}")


if __name__ == "__main__":
    main()
