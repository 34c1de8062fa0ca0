"""Compact per-channel color statistics over RGB, HSV, and CIELab."""

from __future__ import annotations

import numpy as np

from ..images import CIELAB, HSV, ColorImage, convert_colorspace
from .common import DescriptorError, FeatureVector, config_fingerprint


def channel_stats(values: np.ndarray, standard_std: bool = False) -> tuple[float, float, float]:
    """(mean, spread, third moment) of one channel rescaled to [0, 1].

    The spread follows the printed form sqrt(sum((x-mu)^2))/(n-1) — the
    1/(n-1) factor sits outside the root — unless standard_std asks for the
    usual sample standard deviation.  The third moment weights every pixel
    uniformly: (1/n)*sum((x-mu)^3).
    """
    x = values.ravel() / 255.0
    n = x.size
    if n < 2:
        raise DescriptorError("need at least 2 pixels for channel statistics")
    mu = x.mean()
    centered = x - mu
    sum_sq = float(np.dot(centered, centered))
    if standard_std:
        spread = np.sqrt(sum_sq / (n - 1))
    else:
        spread = np.sqrt(sum_sq) / (n - 1)
    m3 = float((centered ** 3).mean())
    return float(mu), float(spread), m3


def col_descriptor(img: ColorImage, standard_std: bool = False) -> FeatureVector:
    """27 values: for each of RGB, HSV, CIELab and each channel, the mean,
    spread, and third central moment of the [0, 1]-rescaled channel."""
    if not isinstance(img, ColorImage):
        raise DescriptorError("COL requires color")
    if img.colorspace != "RGB":
        raise DescriptorError("COL expects RGB input")
    if img.is_effectively_gray():
        raise DescriptorError("COL requires color")
    spaces = [img, convert_colorspace(img, HSV), convert_colorspace(img, CIELAB)]
    values = []
    for space in spaces:
        for c in range(3):
            values.extend(channel_stats(space.data[:, :, c], standard_std))
    fp = config_fingerprint(standard_std=standard_std)
    return FeatureVector(np.array(values), "COL", fp)
