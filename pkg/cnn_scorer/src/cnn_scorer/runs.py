"""Training-run bookkeeping for the deep half of the ensemble.

A TrainRun pins every knob of one fine-tuning job: the backbone, the
learning rate, the batch size, which augmentation app produced its training
images, the epoch count, and the seed.  After training it also records an
outcome status; excluded runs (out of memory, or no better than chance on
their own training set) contribute no scores downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

LEARNING_RATES = (0.001, 0.0001)
BATCH_SIZES = (10, 30, 50, 70)
APP_IDS = (1, 2, 3, 4, 5, 6)

STATUS_PENDING = "pending"
STATUS_CONVERGED = "converged"
STATUS_EXCLUDED_RANDOM = "excluded-random"
STATUS_EXCLUDED_OOM = "excluded-oom"
TERMINAL_STATUSES = (STATUS_CONVERGED, STATUS_EXCLUDED_RANDOM, STATUS_EXCLUDED_OOM)


class ScorerError(ValueError):
    """Raised for malformed inputs or violated training/export contracts."""


@dataclass(frozen=True)
class TrainRun:
    """One fine-tuning configuration and, once trained, its outcome.

    `status` starts as "pending" and ends as one of "converged",
    "excluded-random" (training accuracy within five points of chance after
    the full schedule), or "excluded-oom" (training ran out of memory).
    Only converged runs may contribute scores to a fusion.
    """

    architecture: str = "micronet"
    lr: float = 0.001
    batch: int = 10
    app: int = 1
    epochs: int = 20
    seed: int = 0
    status: str = STATUS_PENDING

    def __post_init__(self):
        if self.lr not in LEARNING_RATES:
            raise ScorerError(f"learning rate must be one of {LEARNING_RATES}, got {self.lr}")
        if self.batch not in BATCH_SIZES:
            raise ScorerError(f"batch size must be one of {BATCH_SIZES}, got {self.batch}")
        if self.app not in APP_IDS:
            raise ScorerError(f"app id must be in {APP_IDS}, got {self.app}")
        if self.epochs < 1:
            raise ScorerError(f"epochs must be >= 1, got {self.epochs}")
        if self.status not in (STATUS_PENDING,) + TERMINAL_STATUSES:
            raise ScorerError(f"unknown status {self.status!r}")

    @property
    def run_id(self) -> str:
        """Stable human-readable identifier, also used for CSV file names."""
        return (f"{self.architecture}-app{self.app}-lr{self.lr:g}"
                f"-b{self.batch}-s{self.seed}")

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED

    def with_status(self, status: str) -> "TrainRun":
        if status not in TERMINAL_STATUSES:
            raise ScorerError(f"not a terminal status: {status!r}")
        return replace(self, status=status)


def sweep_grid(architectures=("micronet",), lrs=(0.001,), batches=(10,),
               apps=APP_IDS, epochs: int = 20, seed: int = 0) -> tuple[TrainRun, ...]:
    """Cartesian sweep over the requested knobs, one pending TrainRun each."""
    return tuple(
        TrainRun(architecture=a, lr=lr, batch=b, app=app, epochs=epochs, seed=seed)
        for a, lr, b, app in itertools.product(architectures, lrs, batches, apps)
    )
