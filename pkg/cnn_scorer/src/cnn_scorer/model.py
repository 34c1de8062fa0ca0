"""The small pretrained backbone that desk-scale sweeps fine-tune.

``micronet`` is a three-block BatchNorm convnet with a 1000-way linear
head.  Instead of shipping a weight blob, the "pretrained" checkpoint is
built on first use by briefly training the backbone on procedurally
generated texture surrogates (oriented gratings, checkerboards, noise,
flats); the build is a pure function of a fixed seed, takes a few seconds
on a CPU, and is cached on disk.  Fine-tuning later swaps the 1000-way head
for an n-class one and updates every parameter.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .runs import ScorerError

INPUT_SIDE = 64
HEAD_CLASSES = 1000

PRETRAIN_SEED = 0
PRETRAIN_STEPS = 80
_N_PRETEXT = 6

CACHE_ENV = "CNN_SCORER_CACHE"
CHECKPOINT_VERSION = 1


def _micronet(n_out: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(1, 8, 3, padding=1), nn.BatchNorm2d(8), nn.ReLU(), nn.MaxPool2d(2),
        nn.Conv2d(8, 16, 3, padding=1), nn.BatchNorm2d(16), nn.ReLU(), nn.MaxPool2d(2),
        nn.Conv2d(16, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(),
        nn.AdaptiveAvgPool2d(4),
        nn.Flatten(),
        nn.Linear(32 * 16, 64), nn.ReLU(),
        nn.Linear(64, n_out),
    )


ARCHITECTURES = {"micronet": _micronet}


def build_model(architecture: str = "micronet", n_out: int = HEAD_CLASSES) -> nn.Sequential:
    if architecture not in ARCHITECTURES:
        raise ScorerError(f"unknown architecture {architecture!r}; "
                          f"have {sorted(ARCHITECTURES)}")
    return ARCHITECTURES[architecture](n_out)


def replace_head(net: nn.Sequential, n_classes: int, seed: int) -> nn.Sequential:
    """Swap the final linear layer for a freshly initialized n-class one."""
    if n_classes < 2:
        raise ScorerError(f"need at least 2 classes, got {n_classes}")
    torch.manual_seed(seed)
    net[-1] = nn.Linear(net[-1].in_features, n_classes)
    return net


def _pretext_batch(rng: np.random.Generator, n: int = 60):
    """Procedural texture surrogates: three grating orientations, a
    checkerboard, a noise field, and a flat patch."""
    side = INPUT_SIDE
    xs, ys = [], []
    yy, xx = np.mgrid[0:side, 0:side]
    for _ in range(n):
        c = int(rng.integers(0, _N_PRETEXT))
        if c < 3:
            theta = (0.0, np.pi / 4, np.pi / 2)[c] + rng.normal(0.0, 0.06)
            freq = rng.uniform(0.08, 0.25)
            img = np.sin(2 * np.pi * freq * (xx * np.cos(theta) + yy * np.sin(theta))
                         + rng.uniform(0.0, 2 * np.pi))
        elif c == 3:
            cell = int(rng.integers(3, 9))
            img = (((xx // cell) + (yy // cell)) % 2) * 2.0 - 1.0
        elif c == 4:
            img = rng.normal(0.0, 1.0, (side, side))
        else:
            img = np.full((side, side), rng.uniform(-1.0, 1.0))
        img = img + rng.normal(0.0, 0.15, (side, side))
        img = (img - img.mean()) / (img.std() + 1e-6)
        xs.append(img.astype(np.float32))
        ys.append(c)
    x = torch.from_numpy(np.stack(xs))[:, None]
    return x, torch.tensor(ys)


def _build_pretrained(architecture: str):
    """Train the backbone on the pretext task; returns (state dict, pretext
    accuracy).  Deterministic: fixed seeds, single thread."""
    torch.set_num_threads(1)
    torch.manual_seed(PRETRAIN_SEED)
    net = build_model(architecture, n_out=_N_PRETEXT)
    opt = torch.optim.Adam(net.parameters(), lr=1e-3)
    lossf = nn.CrossEntropyLoss()
    rng = np.random.default_rng(PRETRAIN_SEED)
    net.train()
    for _ in range(PRETRAIN_STEPS):
        x, y = _pretext_batch(rng)
        opt.zero_grad()
        lossf(net(x), y).backward()
        opt.step()
    net.eval()
    with torch.no_grad():
        x, y = _pretext_batch(rng, 120)
        acc = float((net(x).argmax(1) == y).float().mean())
    # ship with the conventional wide head; fine-tuning replaces it anyway
    torch.manual_seed(PRETRAIN_SEED)
    net[-1] = nn.Linear(net[-1].in_features, HEAD_CLASSES)
    return net.state_dict(), acc


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "cnn-scorer"


def checkpoint_path(architecture: str = "micronet", cache_dir=None) -> Path:
    base = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    return base / f"{architecture}_v{CHECKPOINT_VERSION}.pt"


def pretrained_checkpoint(architecture: str = "micronet", cache_dir=None) -> Path:
    """Path of the cached pretrained checkpoint, building it if absent."""
    if architecture not in ARCHITECTURES:
        raise ScorerError(f"unknown architecture {architecture!r}; "
                          f"have {sorted(ARCHITECTURES)}")
    path = checkpoint_path(architecture, cache_dir)
    if path.is_file():
        return path
    state, acc = _build_pretrained(architecture)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({"architecture": architecture, "state": state,
                "pretext_accuracy": acc, "version": CHECKPOINT_VERSION}, path)
    return path


def load_pretrained(architecture: str = "micronet", checkpoint=None,
                    cache_dir=None) -> nn.Sequential:
    """Backbone with pretrained weights and the stock 1000-way head."""
    path = Path(checkpoint) if checkpoint is not None \
        else pretrained_checkpoint(architecture, cache_dir)
    payload = torch.load(path, weights_only=True)
    if payload.get("architecture") != architecture:
        raise ScorerError(f"{path} holds weights for "
                          f"{payload.get('architecture')!r}, not {architecture!r}")
    net = build_model(architecture, n_out=HEAD_CLASSES)
    net.load_state_dict(payload["state"])
    return net


def checkpoint_pretext_accuracy(path) -> float:
    """Pretext-task accuracy recorded when the checkpoint was built."""
    return float(torch.load(path, weights_only=True)["pretext_accuracy"])
