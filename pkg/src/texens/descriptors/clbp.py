"""Completed LBP: sign, magnitude, and center components combined in a
joint rotation-invariant histogram per neighborhood scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..images import GrayImage
from .common import (
    FeatureVector,
    NeighborhoodConfig,
    config_fingerprint,
    pack_bits,
    require_gray,
    sample_ring,
    uniform_mapping,
)

DEFAULT_SCALES = (NeighborhoodConfig(1.0, 8), NeighborhoodConfig(2.0, 16))


@dataclass(frozen=True)
class ClbpMaps:
    """Intermediate per-scale components: sign codes, magnitude codes,
    center bits, and the image-wide mean magnitude used as the M threshold."""

    sign_codes: np.ndarray
    magnitude_codes: np.ndarray
    center_bits: np.ndarray
    mean_magnitude: float


def clbp_maps(img: GrayImage, cfg: NeighborhoodConfig) -> ClbpMaps:
    """Decompose neighbor differences d_p into sign (d_p >= 0) and magnitude
    (|d_p| >= c with c the mean |d_p| over the whole image); the center bit
    compares the center pixel against the global image mean."""
    data = require_gray(img)
    centers, ring = sample_ring(data, cfg.radius, cfg.neighbors)
    diff = ring - centers[None, :, :]
    mag = np.abs(diff)
    c = float(mag.mean())
    sign_codes = pack_bits(diff >= 0.0)
    magnitude_codes = pack_bits(mag >= c)
    center_bits = (centers >= data.mean()).astype(np.int64)
    return ClbpMaps(sign_codes, magnitude_codes, center_bits, c)


def clbp_descriptor(img: GrayImage, scales=DEFAULT_SCALES) -> FeatureVector:
    """Joint riu2 S/M/C histogram per scale, concatenated.

    Each scale contributes (P+2)*(P+2)*2 bins; the default (1,8)+(2,16)
    pair gives 200 + 648 = 848 values.  Cell index is
    (s_bin * (P+2) + m_bin) * 2 + c_bit, row-major.
    """
    parts = []
    for cfg in scales:
        maps = clbp_maps(img, cfg)
        table = uniform_mapping(cfg.neighbors, "riu2")
        nbins = cfg.neighbors + 2
        s_bin = table[maps.sign_codes]
        m_bin = table[maps.magnitude_codes]
        joint = (s_bin * nbins + m_bin) * 2 + maps.center_bits
        counts = np.bincount(joint.ravel(), minlength=nbins * nbins * 2).astype(np.float64)
        parts.append(counts / counts.sum())
    fp = config_fingerprint(scales=[(s.radius, s.neighbors) for s in scales])
    return FeatureVector(np.concatenate(parts), "CLBP", fp)
