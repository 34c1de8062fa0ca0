"""Session fixtures: a small three-class image set, per-fold augmented
exports produced by the toolkit CLI, and fine-tuned members over them.

Everything the package under test consumes is produced the way an external
user would produce it — through command-line calls — so these fixtures
double as a check of the file-level contract between the two packages.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from cnn_scorer import TrainRun, pretrained_checkpoint, run_member

REPO_ROOT = Path(__file__).resolve().parents[2]
MAKE_SYNTHETIC = REPO_ROOT / "scripts" / "make_synthetic.py"


def run_cmd(*argv, check=True):
    proc = subprocess.run([str(a) for a in argv], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(
            f"command failed ({proc.returncode}): {' '.join(str(a) for a in argv)}\n"
            f"{proc.stderr}")
    return proc


def texens_cli(*argv, check=True):
    return run_cmd(sys.executable, "-m", "texens.cli", *argv, check=check)


@pytest.fixture(scope="session")
def toy_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("deep_toy")
    run_cmd(sys.executable, MAKE_SYNTHETIC, "--out", root / "data",
            "--n-per-class", 12, "--side", 64, "--seed", 11)
    return root


@pytest.fixture(scope="session")
def dataset_dir(toy_root):
    return toy_root / "data"


@pytest.fixture(scope="session")
def app1_dirs(toy_root, dataset_dir):
    """App-1 exports for every fold; the fold-0 run also writes the shared
    fold plan that all other exports reuse."""
    dirs = {0: toy_root / "aug1_f0"}
    texens_cli("augment", "--dataset", dataset_dir, "--out", dirs[0],
               "--app", 1, "--epochs", 20, "--seed", 11, "--k", 3, "--fold", 0)
    plan = dirs[0] / "fold_plan.json"
    for f in (1, 2):
        dirs[f] = toy_root / f"aug1_f{f}"
        texens_cli("augment", "--dataset", dataset_dir, "--out", dirs[f],
                   "--app", 1, "--epochs", 20, "--seed", 11,
                   "--plan", plan, "--fold", f)
    return dirs


@pytest.fixture(scope="session")
def plan_path(app1_dirs):
    return app1_dirs[0] / "fold_plan.json"


@pytest.fixture(scope="session")
def app6_dirs(toy_root, dataset_dir, plan_path):
    dirs = {}
    for f in range(3):
        dirs[f] = toy_root / f"aug6_f{f}"
        texens_cli("augment", "--dataset", dataset_dir, "--out", dirs[f],
                   "--app", 6, "--method", "one", "--epochs", 6, "--seed", 6,
                   "--plan", plan_path, "--fold", f)
    return dirs


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("ckpt_cache")


@pytest.fixture(scope="session")
def checkpoint(cache_dir):
    return pretrained_checkpoint("micronet", cache_dir)


@pytest.fixture(scope="session")
def member_a(toy_root, dataset_dir, plan_path, app1_dirs, checkpoint):
    """The headline toy fine-tune: app 1, 20 epochs."""
    return run_member(TrainRun(app=1, epochs=20, seed=5), dataset_dir,
                      plan_path, app1_dirs,
                      toy_root / "scores" / "deep_app1.csv",
                      checkpoint=checkpoint)


@pytest.fixture(scope="session")
def member_b(toy_root, dataset_dir, plan_path, app6_dirs, checkpoint):
    return run_member(TrainRun(app=6, epochs=6, seed=6), dataset_dir,
                      plan_path, app6_dirs,
                      toy_root / "scores" / "deep_app6.csv",
                      checkpoint=checkpoint)


@pytest.fixture(scope="session")
def excluded_member(toy_root, dataset_dir, plan_path, app1_dirs, checkpoint):
    """A network that never takes an optimizer step: frozen at its random
    head, it must trip the chance-level exclusion guard."""
    return run_member(TrainRun(app=1, epochs=1, seed=9), dataset_dir,
                      plan_path, app1_dirs,
                      toy_root / "scores" / "deep_random.csv",
                      checkpoint=checkpoint, max_batches_per_epoch=0)
