"""Local ternary patterns: thresholded three-way neighbor coding split into
positive and negative binary pattern histograms, two scales."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

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
class LtpConfig:
    """Ternary threshold (gray levels) and the neighborhood scales to use."""

    tau: float = 3.0
    scales: tuple[NeighborhoodConfig, ...] = DEFAULT_SCALES

    def __post_init__(self):
        if self.tau <= 0:
            raise DescriptorError("ternary threshold must be positive")
        if not self.scales:
            raise DescriptorError("at least one neighborhood scale required")


def ternary_split(data: np.ndarray, cfg: NeighborhoodConfig, tau: float):
    """Positive/negative binary code maps for one scale.

    A neighbor codes +1 when it exceeds the center by at least tau, -1 when
    it falls below by at least tau (symmetric boundaries, so negating the
    image around any center value swaps the two maps exactly).
    """
    centers, ring = sample_ring(data, cfg.radius, cfg.neighbors)
    diff = ring - centers[None, :, :]
    pos = diff >= tau
    neg = (-diff >= tau) & ~pos
    return pack_bits(pos), pack_bits(neg)


def ltp_descriptor(img: GrayImage, cfg: LtpConfig = LtpConfig()) -> FeatureVector:
    """Concatenated u2 histograms of positive and negative patterns per scale.

    Default scales (R=1, P=8) and (R=2, P=16) give 59+59+243+243 = 604 values.
    """
    data = require_gray(img)
    parts = []
    for scale in cfg.scales:
        table = uniform_mapping(scale.neighbors, "u2")
        nbins = mapping_bins(scale.neighbors, "u2")
        pos_codes, neg_codes = ternary_split(data, scale, cfg.tau)
        parts.append(l1_hist(table[pos_codes], nbins))
        parts.append(l1_hist(table[neg_codes], nbins))
    fp = config_fingerprint(tau=cfg.tau, scales=[(s.radius, s.neighbors) for s in cfg.scales])
    return FeatureVector(np.concatenate(parts), "LTP", fp)
