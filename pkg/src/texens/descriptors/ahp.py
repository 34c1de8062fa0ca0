"""Adaptive hybrid patterns: LBP-style binary maps whose comparison
thresholds are data-driven quantiles (Gaussian for the global family,
Laplace for the local family), u2-histogrammed per map and scale."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfinv

from ..images import GrayImage
from .common import (
    DescriptorError,
    FeatureVector,
    NeighborhoodConfig,
    config_fingerprint,
    l1_hist,
    mapping_bins,
    pack_bits,
    require_gray,
    sample_ring,
    uniform_mapping,
)

DEFAULT_SCALES = (NeighborhoodConfig(1.0, 8), NeighborhoodConfig(2.0, 16))


@dataclass(frozen=True)
class AhpConfig:
    """Quantization level n (n-1 thresholds per family) and the scales."""

    n_levels: int = 5
    scales: tuple[NeighborhoodConfig, ...] = DEFAULT_SCALES

    def __post_init__(self):
        if self.n_levels < 2:
            raise DescriptorError("need at least 2 quantization levels")


def gaussian_multipliers(n: int) -> np.ndarray:
    """sqrt(2)*erfinv((2i-n)/n) for i=1..n-1: standard-normal quantiles at
    i/n; multiply by the global std to get the global threshold family."""
    i = np.arange(1, n)
    return math.sqrt(2.0) * erfinv((2.0 * i - n) / n)


def laplace_multipliers(n: int) -> np.ndarray:
    """Laplace quantiles at i/n for a unit-std distribution:
    (1/sqrt(2))*ln(2i/n) below the median, mirrored above."""
    i = np.arange(1, n)
    out = np.empty(n - 1)
    lower = i < n / 2
    out[lower] = np.log(2.0 * i[lower] / n) / math.sqrt(2.0)
    out[~lower] = -np.log((2.0 * n - 2.0 * i[~lower]) / n) / math.sqrt(2.0)
    return out


def ahp_descriptor(img: GrayImage, cfg: AhpConfig = AhpConfig()) -> FeatureVector:
    """Concatenated u2 histograms of 4 global + 8 local binary maps per scale.

    Global maps compare neighbors against the image mean shifted by each
    Gaussian-quantile threshold of the image std.  Local maps compare
    neighbors against the center shifted by each Laplace-quantile threshold,
    once scaled by the per-pixel neighbor std and once by the global std.
    A flat image (std 0) collapses every threshold to 0 and stays defined.
    """
    data = require_gray(img)
    mu = data.mean()
    sigma_global = data.std()
    g_mult = gaussian_multipliers(cfg.n_levels)
    l_mult = laplace_multipliers(cfg.n_levels)

    parts = []
    for scale in cfg.scales:
        centers, ring = sample_ring(data, scale.radius, scale.neighbors)
        table = uniform_mapping(scale.neighbors, "u2")
        nbins = mapping_bins(scale.neighbors, "u2")
        sigma_local = ring.std(axis=0)

        for m in g_mult:
            codes = pack_bits(ring >= mu + m * sigma_global)
            parts.append(l1_hist(table[codes], nbins))
        for m in l_mult:
            codes = pack_bits(ring >= centers[None] + m * sigma_local[None])
            parts.append(l1_hist(table[codes], nbins))
        for m in l_mult:
            codes = pack_bits(ring >= centers[None] + m * sigma_global)
            parts.append(l1_hist(table[codes], nbins))

    fp = config_fingerprint(n=cfg.n_levels, scales=[(s.radius, s.neighbors) for s in cfg.scales])
    return FeatureVector(np.concatenate(parts), "AHP", fp)
