"""Sum-rule fusion of converged runs, delegated to the toolkit CLI.

This module deliberately contains no fusion arithmetic.  Member CSVs are
handed to ``texens fuse``, the single implementation of the
normalize-and-sum rule, so fusing deep members can never drift numerically
from fusing handcrafted ones: the bytes of the fused CSV are exactly what
the CLI writes.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

from .runs import STATUS_CONVERGED, ScorerError

DEFAULT_FUSE_CMD = (sys.executable, "-m", "texens.cli")


def ensemble_deep(members, out_csv, fuse_cmd=DEFAULT_FUSE_CMD) -> Path:
    """Fuse the converged members' score CSVs into `out_csv`.

    Excluded runs are dropped up front and never appear in the output
    provenance; fusing zero converged runs is an error.  A
    ``<out>.members.json`` sidecar records which run ids were fused.
    """
    converged = [m for m in members
                 if m.run.status == STATUS_CONVERGED and m.csv_path is not None]
    if not converged:
        raise ScorerError("no converged runs to fuse")

    out = Path(out_csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    cmd = [*fuse_cmd, "fuse", *[str(m.csv_path) for m in converged],
           "--out", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise ScorerError(f"fuse command failed (exit {proc.returncode}): "
                          f"{proc.stderr.strip() or proc.stdout.strip()}")

    sidecar = out.with_suffix(out.suffix + ".members.json")
    sidecar.write_text(json.dumps(
        {"members": [m.run.run_id for m in converged]},
        indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
