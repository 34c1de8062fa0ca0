"""Rotation-invariant co-occurrence of LBP code pairs at a fixed
displacement, accumulated over four orientations and three radii."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..images import GrayImage
from .common import (
    DescriptorError,
    FeatureVector,
    NeighborhoodConfig,
    config_fingerprint,
    require_gray,
)
from .lbp import lbp_codes

DEFAULT_RADII = (1, 2, 4)
P = 8


@dataclass(frozen=True)
class RicConfig:
    """Radius set; each radius pairs codes at displacement interval 2*radius
    along orientations {0, pi/4, pi/2, 3pi/4}."""

    radii: tuple[int, ...] = DEFAULT_RADII

    def __post_init__(self):
        if not self.radii or any(r <= 0 for r in self.radii):
            raise DescriptorError("radii must be positive")

    def interval(self, radius: int) -> int:
        return 2 * radius


def _rotate_code(code: np.ndarray | int, k: int) -> np.ndarray | int:
    """Cyclic left rotation of an 8-bit code by k positions."""
    return ((code << k) | (code >> (P - k))) & 0xFF if k else code


@lru_cache(maxsize=None)
def rotation_class_table() -> tuple[np.ndarray, int]:
    """Canonical labels for ordered 8-bit code pairs under simultaneous
    rotation only (no reversal); 8230 classes.  Used as a cross-check."""
    return _class_table(with_reversal=False)


@lru_cache(maxsize=None)
def pair_class_table() -> tuple[np.ndarray, int]:
    """Canonical labels for code pairs under simultaneous rotation combined
    with pair reversal, (A,B) ~ (rot_k A, rot_k B) ~ (rot_k B, rot_k A).

    Returns (table over all 65536 ordered pairs -> contiguous class index,
    class count)."""
    return _class_table(with_reversal=True)


def _class_table(with_reversal: bool) -> tuple[np.ndarray, int]:
    codes = np.arange(256, dtype=np.int64)
    rot = np.empty((P, 256), dtype=np.int64)
    for k in range(P):
        rot[k] = ((codes << k) | (codes >> (P - k))) & 0xFF
    pairs = np.arange(65536, dtype=np.int64)
    a = pairs >> 8
    b = pairs & 0xFF
    canon = np.full(65536, 1 << 20, dtype=np.int64)
    for k in range(P):
        np.minimum(canon, rot[k][a] * 256 + rot[k][b], out=canon)
        if with_reversal:
            np.minimum(canon, rot[k][b] * 256 + rot[k][a], out=canon)
    reps, table = np.unique(canon, return_inverse=True)
    table = table.astype(np.int64)
    table.setflags(write=False)
    return table, reps.size


# displacement vectors (dx, dy) for orientations 0, pi/4, pi/2, 3pi/4;
# the set maps onto itself (up to reversal) under quarter-turns
_ORIENTATIONS = ((1, 0), (1, 1), (0, 1), (-1, 1))


def ric_descriptor(img: GrayImage, cfg: RicConfig = RicConfig()) -> FeatureVector:
    """Per radius: histogram LBP code pairs at the four displacements, with
    each pair mapped to its rotation/reversal equivalence class; normalize
    and concatenate the radii."""
    data = require_gray(img)
    table, n_classes = pair_class_table()
    parts = []
    for radius in cfg.radii:
        codes = lbp_codes(img, NeighborhoodConfig(float(radius), P)).codes
        d = cfg.interval(radius)
        h, w = codes.shape
        if h <= d or w <= d:
            raise DescriptorError(f"image too small for radius {radius} pairs")
        counts = np.zeros(n_classes, dtype=np.float64)
        for ux, uy in _ORIENTATIONS:
            dx, dy = ux * d, uy * d
            r0, r1 = max(0, -dy), min(h, h - dy)
            c0, c1 = max(0, -dx), min(w, w - dx)
            first = codes[r0:r1, c0:c1]
            second = codes[r0 + dy:r1 + dy, c0 + dx:c1 + dx]
            pair_ids = table[(first * 256 + second).ravel()]
            counts += np.bincount(pair_ids, minlength=n_classes)
        parts.append(counts / counts.sum())
    fp = config_fingerprint(radii=cfg.radii)
    return FeatureVector(np.concatenate(parts), "RIC", fp)
