"""Geometric image transforms: flips plus a single composed affine warp
(scale about center with crop-to-original, rotation, translation, shear)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..images import ColorImage, GrayImage


class GeoError(ValueError):
    pass


@dataclass(frozen=True)
class GeoSpec:
    """One sampled geometric transform.  Inactive fields hold identity
    values; active ranges follow the protocol definitions (scale in [1, 2],
    rotation within +/-10 degrees, translation 0..5 px, shear 0..30 degrees)."""

    flip_lr: bool = False
    flip_tb: bool = False
    scale: tuple[float, float] = (1.0, 1.0)
    rotate_deg: float = 0.0
    translate: tuple[float, float] = (0.0, 0.0)
    shear_deg: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        sx, sy = self.scale
        if not (1.0 <= sx <= 2.0 and 1.0 <= sy <= 2.0):
            raise GeoError("scale factors must lie in [1, 2]")
        if abs(self.rotate_deg) > 10.0:
            raise GeoError("rotation must lie in [-10, 10] degrees")
        tx, ty = self.translate
        if not (0.0 <= tx <= 5.0 and 0.0 <= ty <= 5.0):
            raise GeoError("translation must lie in [0, 5] pixels")
        hx, hy = self.shear_deg
        if not (0.0 <= hx <= 30.0 and 0.0 <= hy <= 30.0):
            raise GeoError("shear must lie in [0, 30] degrees")

    @property
    def is_identity_affine(self) -> bool:
        return (self.scale == (1.0, 1.0) and self.rotate_deg == 0.0
                and self.translate == (0.0, 0.0) and self.shear_deg == (0.0, 0.0))


def _affine_params(spec: GeoSpec) -> tuple[np.ndarray, np.ndarray]:
    """Forward map p' = A (p - c) + c + v in (x, y) coordinates."""
    sx, sy = spec.scale
    theta = math.radians(spec.rotate_deg)
    hx, hy = (math.tan(math.radians(d)) for d in spec.shear_deg)
    scale_m = np.array([[sx, 0.0], [0.0, sy]])
    rot_m = np.array([[math.cos(theta), -math.sin(theta)],
                      [math.sin(theta), math.cos(theta)]])
    shear_m = np.array([[1.0, hx], [hy, 1.0]])
    a = shear_m @ rot_m @ scale_m
    v = shear_m @ np.array(spec.translate, dtype=np.float64)
    return a, v


def _warp_plane(plane: np.ndarray, a: np.ndarray, v: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    inv = np.linalg.inv(a)
    ys, xs = np.mgrid[0:h, 0:w]
    qx = xs - cx - v[0]
    qy = ys - cy - v[1]
    px = inv[0, 0] * qx + inv[0, 1] * qy + cx
    py = inv[1, 0] * qx + inv[1, 1] * qy + cy

    x0 = np.floor(px).astype(np.int64)
    y0 = np.floor(py).astype(np.int64)
    tx = px - x0
    ty = py - y0
    out = np.zeros_like(plane)
    valid = (px >= 0) & (px <= w - 1) & (py >= 0) & (py <= h - 1)
    x0c = np.clip(x0, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    top = plane[y0c, x0c] + tx * (plane[y0c, x1c] - plane[y0c, x0c])
    bot = plane[y1c, x0c] + tx * (plane[y1c, x1c] - plane[y1c, x0c])
    out[valid] = (top + ty * (bot - top))[valid]
    return out


def geometric_transform(img, spec: GeoSpec):
    """Apply flips by exact index reversal, then the composed affine warp
    with bilinear sampling; out-of-bounds samples fill with 0; output keeps
    the input dimensions.  Accepts GrayImage or ColorImage."""
    is_color = isinstance(img, ColorImage)
    data = img.data
    if spec.flip_lr:
        data = data[:, ::-1] if not is_color else data[:, ::-1, :]
    if spec.flip_tb:
        data = data[::-1]
    if spec.is_identity_affine:
        out = np.ascontiguousarray(data)
    else:
        a, v = _affine_params(spec)
        if is_color:
            out = np.stack([_warp_plane(np.ascontiguousarray(data[:, :, c]), a, v)
                            for c in range(3)], axis=-1)
        else:
            out = _warp_plane(np.ascontiguousarray(data), a, v)
        out = np.clip(out, 0.0, 255.0)
    if is_color:
        return ColorImage(out, img.colorspace)
    return GrayImage(out)
