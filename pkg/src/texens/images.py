"""Image model: grayscale/color planes in [0, 255], loading, colorspace
conversion, and bilinear resizing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image as PILImage

RGB = "RGB"
HSV = "HSV"
CIELAB = "CIELab"

_LUMA_WEIGHTS = (0.299, 0.587, 0.114)  # Rec. 601


class ImageError(ValueError):
    """Raised for unreadable files or invalid image operations."""


@dataclass(frozen=True)
class GrayImage:
    """Single-plane image, float64, values in [0, 255], row-major (h, w)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ImageError(f"gray image must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ImageError("gray image contains non-finite values")
        if arr.min() < 0 or arr.max() > 255:
            raise ImageError("gray image values outside [0, 255]")
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class ColorImage:
    """Three-plane image with a colorspace tag; planes share dimensions."""

    data: np.ndarray  # (h, w, 3) float64
    colorspace: str = RGB

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ImageError(f"color image must be (h, w, 3), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ImageError("color image contains non-finite values")
        if arr.min() < 0 or arr.max() > 255:
            raise ImageError("color image values outside [0, 255]")
        if self.colorspace not in (RGB, HSV, CIELAB):
            raise ImageError(f"unknown colorspace {self.colorspace!r}")
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def channel(self, i: int) -> GrayImage:
        return GrayImage(self.data[:, :, i])

    def is_effectively_gray(self) -> bool:
        """True when all three loaded planes are identical (stored-as-color
        grayscale data; per-channel replication stays off for these)."""
        d = self.data
        return bool(np.array_equal(d[:, :, 0], d[:, :, 1]) and np.array_equal(d[:, :, 1], d[:, :, 2]))


def load_image(path) -> GrayImage | ColorImage:
    """Load PNG/TIFF/JPEG/BMP. 16-bit data is rescaled linearly to [0, 255];
    alpha is dropped; a 3-channel file with identical planes loads as gray."""
    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64)
                arr = arr * (255.0 / 65535.0)
                return GrayImage(np.clip(arr, 0.0, 255.0))
            if mode in ("RGBA", "LA", "P", "PA", "CMYK"):
                im = im.convert("RGBA" if "A" in mode or mode == "P" else "RGB")
                if im.mode == "RGBA":
                    im = im.convert("RGB")
            if im.mode == "L":
                return GrayImage(np.asarray(im, dtype=np.float64))
            if im.mode == "RGB":
                arr = np.asarray(im, dtype=np.float64)
                color = ColorImage(arr, RGB)
                if color.is_effectively_gray():
                    return GrayImage(arr[:, :, 0])
                return color
            if im.mode == "F":
                arr = np.asarray(im, dtype=np.float64)
                return GrayImage(np.clip(arr, 0.0, 255.0))
            im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.float64)
            return ColorImage(arr, RGB)
    except ImageError:
        raise
    except Exception as exc:
        raise ImageError(f"cannot read image {path}: {exc}") from exc


def as_gray(img: GrayImage | ColorImage) -> GrayImage:
    """Any image as a single plane (color goes through Rec. 601 luma)."""
    if isinstance(img, GrayImage):
        return img
    if img.colorspace != RGB:
        raise ImageError("luma conversion requires RGB input")
    return to_gray(img)


def to_gray(img: ColorImage) -> GrayImage:
    """Rec. 601 luma: 0.299 R + 0.587 G + 0.114 B."""
    if img.colorspace != RGB:
        raise ImageError(f"to_gray requires RGB input, got {img.colorspace}")
    wr, wg, wb = _LUMA_WEIGHTS
    d = img.data
    luma = wr * d[:, :, 0] + wg * d[:, :, 1] + wb * d[:, :, 2]
    return GrayImage(np.clip(luma, 0.0, 255.0))


def convert_colorspace(img: ColorImage, target: str) -> ColorImage:
    """RGB to HSV or CIELab (D65), channels rescaled back to [0, 255]."""
    if img.colorspace != RGB:
        raise ImageError("convert_colorspace expects RGB input")
    if target == HSV:
        return ColorImage(_rgb_to_hsv_255(img.data), HSV)
    if target == CIELAB:
        return ColorImage(_rgb_to_lab_255(img.data), CIELAB)
    raise ImageError(f"unsupported target colorspace {target!r}")


def _rgb_to_hsv_255(rgb255: np.ndarray) -> np.ndarray:
    rgb = rgb255 / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = np.max(rgb, axis=-1)
    mn = np.min(rgb, axis=-1)
    delta = v - mn
    s = np.where(v > 0, delta / np.where(v > 0, v, 1.0), 0.0)

    h = np.zeros_like(v)
    nz = delta > 0
    rmax = nz & (v == r)
    gmax = nz & (v == g) & ~rmax
    bmax = nz & ~rmax & ~gmax
    d = np.where(nz, delta, 1.0)
    h[rmax] = (((g - b) / d)[rmax] / 6.0) % 1.0
    h[gmax] = (((b - r) / d)[gmax] + 2.0) / 6.0
    h[bmax] = (((r - g) / d)[bmax] + 4.0) / 6.0

    out = np.stack([h, s, v], axis=-1) * 255.0
    return np.clip(out, 0.0, 255.0)


# sRGB -> XYZ (D65) matrix and Lab constants
_SRGB_TO_XYZ = np.array(
    [
        [0.412453, 0.357580, 0.180423],
        [0.212671, 0.715160, 0.072169],
        [0.019334, 0.119193, 0.950227],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])  # 2-degree observer


def _rgb_to_lab_255(rgb255: np.ndarray) -> np.ndarray:
    rgb = rgb255 / 255.0
    linear = np.where(rgb > 0.04045, ((rgb + 0.055) / 1.055) ** 2.4, rgb / 12.92)
    xyz = linear @ _SRGB_TO_XYZ.T
    xyz = xyz / _D65_WHITE

    eps = (6.0 / 29.0) ** 3
    f = np.where(xyz > eps, np.cbrt(xyz), xyz / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    lum = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)

    # 8-bit packing: L in [0,100] -> [0,255]; a,b offset by 128
    out = np.stack([lum * 255.0 / 100.0, a + 128.0, b + 128.0], axis=-1)
    return np.clip(out, 0.0, 255.0)


def _resize_axis(arr: np.ndarray, new_len: int, axis: int) -> np.ndarray:
    old_len = arr.shape[axis]
    if new_len == old_len:
        return arr
    if new_len == 1:
        coords = np.array([(old_len - 1) / 2.0])
    else:
        coords = np.arange(new_len) * ((old_len - 1) / (new_len - 1))
    lo = np.floor(coords).astype(int)
    hi = np.minimum(lo + 1, old_len - 1)
    t = coords - lo
    a = np.take(arr, lo, axis=axis)
    b = np.take(arr, hi, axis=axis)
    shape = [1] * arr.ndim
    shape[axis] = new_len
    t = t.reshape(shape)
    # lerp form keeps constant inputs exact
    return a + t * (b - a)


def resize_bilinear(img, new_width: int, new_height: int):
    """Bilinear resize with corners aligned to pixel centers. Accepts and
    returns GrayImage or ColorImage."""
    if new_width < 1 or new_height < 1:
        raise ImageError("resize dimensions must be >= 1")
    if isinstance(img, GrayImage):
        out = _resize_axis(_resize_axis(img.data, new_height, 0), new_width, 1)
        return GrayImage(np.clip(out, 0.0, 255.0))
    out = _resize_axis(_resize_axis(img.data, new_height, 0), new_width, 1)
    return ColorImage(np.clip(out, 0.0, 255.0), img.colorspace)
