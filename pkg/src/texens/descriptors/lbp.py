"""Local binary pattern code maps (sign of neighbor-minus-center)."""

from __future__ import annotations

import numpy as np

from ..images import GrayImage
from .common import CodeMap, NeighborhoodConfig, pack_bits, require_gray, sample_ring


def lbp_codes(img: GrayImage, cfg: NeighborhoodConfig) -> CodeMap:
    """Per-pixel code: bit p set iff neighbor p >= center.

    Neighbors are sampled on the radius-R circle with bilinear interpolation;
    a border of ceil(R) pixels is excluded so all samples stay inside.
    """
    data = require_gray(img)
    centers, ring = sample_ring(data, cfg.radius, cfg.neighbors)
    bits = ring >= centers[None, :, :]
    return CodeMap(pack_bits(bits), cfg.neighbors)
