"""Shape statistics of thresholded connected components."""

from __future__ import annotations

import numpy as np
from skimage.filters import threshold_otsu
from skimage.measure import label, regionprops

from ..images import GrayImage
from .common import FeatureVector, config_fingerprint, require_gray

N_FEATURES = 9


def mor_descriptor(img: GrayImage) -> FeatureVector:
    """9 values from the Otsu-binarized image's 8-connected components:
    object count, foreground fraction, mean and std of area, mean perimeter,
    mean eccentricity, mean bounding-box aspect ratio (width/height), mean
    solidity, mean extent.  Empty foreground gives the zero vector.
    """
    data = require_gray(img)
    fp = config_fingerprint(features=N_FEATURES)
    try:
        thresh = threshold_otsu(data)
    except ValueError:
        return FeatureVector(np.zeros(N_FEATURES), "MOR", fp)
    binary = data > thresh
    if not binary.any():
        return FeatureVector(np.zeros(N_FEATURES), "MOR", fp)
    labels = label(binary, connectivity=2)
    props = regionprops(labels)
    areas = np.array([p.area for p in props], dtype=np.float64)
    perimeters = np.array([p.perimeter for p in props])
    eccentricities = np.array([p.eccentricity for p in props])
    aspects = np.array([
        (p.bbox[3] - p.bbox[1]) / (p.bbox[2] - p.bbox[0]) for p in props])
    solidities = np.array([p.solidity for p in props])
    extents = np.array([p.extent for p in props])
    values = np.array([
        float(len(props)),
        float(binary.mean()),
        float(areas.mean()),
        float(areas.std()),
        float(perimeters.mean()),
        float(eccentricities.mean()),
        float(aspects.mean()),
        float(solidities.mean()),
        float(extents.mean()),
    ])
    return FeatureVector(values, "MOR", fp)
