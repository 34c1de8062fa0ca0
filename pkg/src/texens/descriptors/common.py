"""Shared machinery for neighborhood descriptors: circular sampling offsets,
bilinear neighbor extraction, uniform-pattern mappings, histograms."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..images import GrayImage


class DescriptorError(ValueError):
    """Raised for invalid descriptor configurations or undersized images."""


@dataclass(frozen=True)
class NeighborhoodConfig:
    """Circular sampling neighborhood: P points on a radius-R circle."""

    radius: float
    neighbors: int

    def __post_init__(self):
        if self.radius <= 0:
            raise DescriptorError("radius must be positive")
        if self.neighbors not in (4, 8, 16):
            raise DescriptorError("neighbor count must be one of 4, 8, 16")

    @property
    def margin(self) -> int:
        return int(math.ceil(self.radius))


@dataclass(frozen=True)
class CodeMap:
    """Per-pixel integer codes over the interior region of an image."""

    codes: np.ndarray  # (h', w') ints
    n_bits: int

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.ndim != 2:
            raise DescriptorError("code map must be 2-D")
        if codes.size and (codes.min() < 0 or codes.max() >= (1 << self.n_bits)):
            raise DescriptorError(f"codes outside [0, 2^{self.n_bits})")
        object.__setattr__(self, "codes", codes)

    @property
    def width(self) -> int:
        return self.codes.shape[1]

    @property
    def height(self) -> int:
        return self.codes.shape[0]


@dataclass(frozen=True)
class FeatureVector:
    """Descriptor output: a flat vector plus tags identifying what produced it."""

    values: np.ndarray
    tag: str
    config: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(vals)):
            raise DescriptorError(f"{self.tag}: non-finite feature values")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size


def config_fingerprint(**params) -> str:
    """Stable 12-hex-digit digest of a parameter set, for header matching."""
    canon = ";".join(f"{k}={params[k]!r}" for k in sorted(params))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def circular_offsets(radius: float, neighbors: int) -> np.ndarray:
    """(P, 2) array of (dx, dy) sampling offsets, theta_p = 2*pi*p/P.

    Offsets are built from the first quadrant and replicated by exact 90-degree
    rotations, so the set is closed under quarter-turns bit-for-bit (cos and
    sin of the same angle otherwise differ in the last ulp).
    """
    quarter = neighbors // 4
    base = []
    for rem in range(quarter):
        phi = 2.0 * math.pi * rem / neighbors
        base.append((radius * math.cos(phi), radius * math.sin(phi)))
    offsets = np.empty((neighbors, 2), dtype=np.float64)
    for p in range(neighbors):
        quadrant, rem = divmod(p, quarter)
        x, y = base[rem]
        for _ in range(quadrant):
            x, y = -y, x
        offsets[p, 0] = x
        offsets[p, 1] = y
    return offsets


def _shifted_block(data: np.ndarray, margin: int, dy_int: int, dx_int: int) -> np.ndarray:
    h, w = data.shape
    r0 = margin + dy_int
    c0 = margin + dx_int
    return data[r0:h - 2 * margin + r0, c0:w - 2 * margin + c0]


def sample_ring(data: np.ndarray, radius: float, neighbors: int,
                margin: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Bilinearly sampled circular neighbors for every interior pixel.

    Returns (centers, ring): centers is (h', w') with h' = h - 2*margin,
    ring is (P, h', w').  Interpolated values are rounded to 4 decimals so
    symmetric configurations compare identically; integer offsets are exact.
    """
    if margin is None:
        margin = int(math.ceil(radius))
    h, w = data.shape
    if h <= 2 * margin or w <= 2 * margin:
        raise DescriptorError(
            f"image {h}x{w} too small for radius {radius} (margin {margin})")
    centers = data[margin:h - margin, margin:w - margin]
    offsets = circular_offsets(radius, neighbors)
    ring = np.empty((neighbors,) + centers.shape, dtype=np.float64)
    for p, (dx, dy) in enumerate(offsets):
        y0 = math.floor(dy)
        x0 = math.floor(dx)
        ty = dy - y0
        tx = dx - x0
        if ty == 0.0 and tx == 0.0:
            ring[p] = _shifted_block(data, margin, y0, x0)
            continue
        a = _shifted_block(data, margin, y0, x0)
        b = _shifted_block(data, margin, y0, x0 + 1)
        c = _shifted_block(data, margin, y0 + 1, x0)
        d = _shifted_block(data, margin, y0 + 1, x0 + 1)
        top = a + tx * (b - a)
        bot = c + tx * (d - c)
        ring[p] = np.round(top + ty * (bot - top), 4)
    return centers, ring


@lru_cache(maxsize=None)
def uniform_mapping(neighbors: int, kind: str) -> np.ndarray:
    """Lookup table mapping raw P-bit codes to uniform-pattern bins.

    kind "u2": codes with at most 2 circular 0/1 transitions each get their
    own bin (P*(P-1)+2 of them); everything else shares one final bin.
    kind "riu2": uniform codes map to their set-bit count; the rest to P+1.
    """
    if neighbors not in (8, 16):
        raise DescriptorError("uniform mappings support P in {8, 16}")
    if kind not in ("u2", "riu2"):
        raise DescriptorError(f"unknown mapping kind {kind!r}")
    size = 1 << neighbors
    table = np.empty(size, dtype=np.int64)
    if kind == "u2":
        junk = neighbors * (neighbors - 1) + 2
        nxt = 0
        for code in range(size):
            if _transitions(code, neighbors) <= 2:
                table[code] = nxt
                nxt += 1
            else:
                table[code] = junk
        assert nxt == junk
    else:
        for code in range(size):
            if _transitions(code, neighbors) <= 2:
                table[code] = bin(code).count("1")
            else:
                table[code] = neighbors + 1
    table.setflags(write=False)
    return table


def mapping_bins(neighbors: int, kind: str) -> int:
    if kind == "u2":
        return neighbors * (neighbors - 1) + 3
    return neighbors + 2


def _transitions(code: int, bits: int) -> int:
    rotated = ((code << 1) | (code >> (bits - 1))) & ((1 << bits) - 1)
    return bin(code ^ rotated).count("1")


def l1_hist(codes: np.ndarray, n_bins: int) -> np.ndarray:
    """Normalized histogram over integer codes; all-zero only if input empty."""
    counts = np.bincount(np.asarray(codes).ravel(), minlength=n_bins).astype(np.float64)
    total = counts.sum()
    if total == 0:
        return counts
    return counts / total


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """(P, ...) boolean planes -> integer codes with plane p as bit 2^p."""
    weights = (1 << np.arange(bits.shape[0], dtype=np.int64))
    return np.tensordot(weights, bits.astype(np.int64), axes=(0, 0))


def require_gray(img) -> np.ndarray:
    if not isinstance(img, GrayImage):
        raise DescriptorError("expected a grayscale image")
    return img.data
