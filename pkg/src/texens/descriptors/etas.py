"""Threshold adjacency statistics over seven mean-anchored binarization
ranges: per range, the distribution of white-neighbor counts among white
pixels."""

from __future__ import annotations

import numpy as np

from ..images import GrayImage
from .common import FeatureVector, config_fingerprint, require_gray

DEFAULT_CUTOFF = 30.0


def threshold_ranges(mu: float, tau: float = DEFAULT_CUTOFF) -> list[tuple[float, float]]:
    """Seven [low, high] binarization windows anchored at the image mean,
    clamped to [0, 255]."""
    ranges = [
        (mu, 255.0),
        (mu - tau, 255.0),
        (mu - tau, mu + tau),
        (mu, 255.0 - tau),
        (mu - tau, 255.0 - tau),
        (mu + tau, 255.0 - tau),
        (mu + tau, 255.0),
    ]
    return [(max(0.0, lo), min(255.0, hi)) for lo, hi in ranges]


def tas_statistics(mask: np.ndarray) -> np.ndarray:
    """9-vector: fraction of white pixels with exactly k white 8-neighbors,
    k = 0..8; all zeros when the mask has no white pixels.

    Neighbor counts are taken over the interior (pixels with all 8
    neighbors inside the image)."""
    mask = mask.astype(np.float64)
    h, w = mask.shape
    if h < 3 or w < 3:
        return np.zeros(9)
    counts = np.zeros((h - 2, w - 2))
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            counts += mask[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx]
    inner = mask[1:-1, 1:-1].astype(bool)
    n_white = int(inner.sum())
    if n_white == 0:
        return np.zeros(9)
    hist = np.bincount(counts[inner].astype(np.int64), minlength=9).astype(np.float64)
    return hist / n_white


def etas_descriptor(img: GrayImage, tau: float = DEFAULT_CUTOFF) -> FeatureVector:
    """63 values: TAS statistics of the seven binarized images."""
    data = require_gray(img)
    mu = float(data.mean())
    parts = []
    for lo, hi in threshold_ranges(mu, tau):
        mask = (data >= lo) & (data <= hi)
        parts.append(tas_statistics(mask))
    fp = config_fingerprint(tau=tau)
    return FeatureVector(np.concatenate(parts), "ETAS", fp)
