"""Fine-tuning over per-epoch augmented image sets.

Scheduled epoch ``e`` reads the ``epoch_<e>/`` tree of an augmented export,
so the network sees exactly the images the toolkit wrote, in a shuffle
order fixed by the run seed.  Two exclusion rules mark a run as unusable:
running out of memory ("excluded-oom"), and ending the schedule with a
training accuracy within five points of chance ("excluded-random", the
guard that catches effectively untrained networks).  Everything is pinned
to one torch thread so reruns are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import (image_path, load_gray, manifest_classes, manifest_epochs,
                   read_manifest, standardize)
from .model import INPUT_SIDE, load_pretrained, replace_head
from .runs import (STATUS_CONVERGED, STATUS_EXCLUDED_OOM,
                   STATUS_EXCLUDED_RANDOM, ScorerError, TrainRun)

RANDOM_MARGIN = 0.05


@dataclass(frozen=True)
class FinetuneResult:
    """Outcome of one fine-tuning job.

    `model` is None when the run went out of memory; for excluded-random
    runs it is kept for inspection but must not score anything (the status
    is what downstream code gates on).
    """

    run: TrainRun
    class_names: tuple[str, ...]
    train_accuracy: float
    epoch_losses: tuple[float, ...]
    model: nn.Module | None = field(repr=False, default=None)


def _is_oom(exc: BaseException) -> bool:
    if exc.__class__.__name__ == "OutOfMemoryError":
        return True
    return isinstance(exc, (RuntimeError, MemoryError)) and \
        "out of memory" in str(exc).lower()


def _epoch_tensors(aug_dir, rows, epoch: int, class_index: dict[str, int],
                   side: int = INPUT_SIDE):
    """Tensors for one exported epoch, in sorted sample-id order."""
    picked = sorted((r for r in rows if r.epoch == epoch),
                    key=lambda r: r.sample_id)
    xs, ys = [], []
    for r in picked:
        p = image_path(aug_dir, r)
        if not p.is_file():
            raise ScorerError(f"augmented image missing: {p}")
        xs.append(standardize(load_gray(p, side)))
        ys.append(class_index[r.class_name])
    x = torch.from_numpy(np.stack(xs))[:, None]
    return x, torch.tensor(ys)


def _batches(n: int, batch: int, generator: torch.Generator) -> list[torch.Tensor]:
    """Shuffled index batches; a trailing singleton is folded into the
    previous batch so BatchNorm always sees at least two samples."""
    perm = torch.randperm(n, generator=generator)
    out = [perm[i:i + batch] for i in range(0, n, batch)]
    if len(out) > 1 and len(out[-1]) == 1:
        out[-2] = torch.cat([out[-2], out.pop()])
    return out


def evaluate_accuracy(model: nn.Module, x: torch.Tensor, y: torch.Tensor,
                      batch: int = 256) -> float:
    model.eval()
    hits = 0
    with torch.no_grad():
        for i in range(0, len(y), batch):
            hits += int((model(x[i:i + batch]).argmax(1) == y[i:i + batch]).sum())
    return hits / len(y)


def finetune(run: TrainRun, aug_dir, checkpoint=None, cache_dir=None,
             max_batches_per_epoch: int | None = None) -> FinetuneResult:
    """Fine-tune the run's architecture on one augmented export.

    The pretrained head is replaced by an n-class layer and every parameter
    is updated (nothing frozen).  `max_batches_per_epoch` caps the number of
    optimizer steps per epoch — 0 performs no training at all, which is how
    an untrained network can be injected to exercise the exclusion guard.
    """
    torch.set_num_threads(1)
    aug_dir = Path(aug_dir)
    rows = read_manifest(aug_dir / "manifest.tsv")
    n_epochs = manifest_epochs(rows)
    if run.epochs > n_epochs:
        raise ScorerError(f"run wants {run.epochs} epochs but {aug_dir} "
                          f"exports only {n_epochs}")
    class_names = manifest_classes(rows)
    class_index = {c: i for i, c in enumerate(class_names)}

    model = load_pretrained(run.architecture, checkpoint, cache_dir)
    replace_head(model, len(class_names), run.seed)
    for p in model.parameters():
        p.requires_grad_(True)

    torch.manual_seed(run.seed)
    opt = torch.optim.SGD(model.parameters(), lr=run.lr, momentum=0.9)
    lossf = nn.CrossEntropyLoss()
    shuffler = torch.Generator().manual_seed(run.seed)

    losses = []
    try:
        for epoch in range(1, run.epochs + 1):
            x, y = _epoch_tensors(aug_dir, rows, epoch, class_index)
            batches = _batches(len(y), run.batch, shuffler)
            if max_batches_per_epoch is not None:
                batches = batches[:max_batches_per_epoch]
            model.train()
            total = 0.0
            for idx in batches:
                opt.zero_grad()
                loss = lossf(model(x[idx]), y[idx])
                loss.backward()
                opt.step()
                total += float(loss.detach())
            losses.append(total / len(batches) if batches else math.nan)
    except Exception as exc:  # noqa: BLE001 - OOM can surface as RuntimeError
        if _is_oom(exc):
            return FinetuneResult(run.with_status(STATUS_EXCLUDED_OOM),
                                  class_names, math.nan, tuple(losses), None)
        raise

    x, y = _epoch_tensors(aug_dir, rows, run.epochs, class_index)
    acc = evaluate_accuracy(model, x, y)
    chance = 1.0 / len(class_names)
    status = STATUS_EXCLUDED_RANDOM if acc <= chance + RANDOM_MARGIN \
        else STATUS_CONVERGED
    return FinetuneResult(run.with_status(status), class_names, acc,
                          tuple(losses), model)
