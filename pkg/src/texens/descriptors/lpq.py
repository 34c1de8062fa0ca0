"""Local phase quantization: sign-quantized short-term Fourier coefficients
over local windows, with Markov-model decorrelation, plus the multi-parameter
ternary bank (one vector per window/frequency/threshold combination)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..images import GrayImage
from .common import DescriptorError, FeatureVector, config_fingerprint, l1_hist, pack_bits, require_gray

MLPQ_WINDOWS = (3, 7, 11)
MLPQ_SCALES = (0.75, 0.95, 1.15, 1.35, 1.55, 1.75, 1.95)
MLPQ_TAUS = (0.2, 0.4, 0.6, 0.8, 1.0)


@dataclass(frozen=True)
class LpqConfig:
    """Window size w (odd), frequency scale s (a = s/w), decorrelation
    coefficient rho, ternary threshold tau (0 selects plain binary coding)."""

    window: int = 3
    scale: float = 1.0
    rho: float = 0.9
    tau: float = 0.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise DescriptorError("LPQ window must be an odd integer >= 3")
        if not (0.0 < self.rho < 1.0):
            raise DescriptorError("rho must lie in (0, 1)")
        if self.tau < 0:
            raise DescriptorError("tau must be >= 0")


@lru_cache(maxsize=None)
def whitening_matrix(rho: float) -> np.ndarray:
    """Inverse square root of the order-8 first-order Markov covariance
    D_ij = rho^|i-j| over the stacked [Re, Im] coefficient dimensions.
    rho -> 0 gives the identity, leaving the raw signs untouched."""
    idx = np.arange(8)
    cov = rho ** np.abs(idx[:, None] - idx[None, :])
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() <= 0:
        raise DescriptorError("Markov covariance not positive definite")
    mat = (vecs / np.sqrt(vals)) @ vecs.T
    mat.setflags(write=False)
    return mat


def _valid_corr_axis(data: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """Valid-region correlation along one axis: out[x] = sum_k kernel[k+r]*data[x+k]."""
    w = kernel.size
    n = data.shape[axis]
    out_len = n - w + 1
    sl = [slice(None)] * data.ndim
    sl[axis] = slice(0, out_len)
    acc = kernel[0] * data[tuple(sl)]
    for k in range(1, w):
        sl[axis] = slice(k, k + out_len)
        acc = acc + kernel[k] * data[tuple(sl)]
    return acc


def stft_coefficients(data: np.ndarray, window: int, scale: float) -> np.ndarray:
    """(8, h', w') stack [Re1, Im1, ..., Re4, Im4] of windowed Fourier
    coefficients at frequencies {(a,0), (0,a), (a,a), (a,-a)}, a = scale/w,
    evaluated over every fully interior w-by-w window.

    Coefficient at (r, c): sum over offsets (dx, dy) in the window of
    I[r+dy, c+dx] * exp(-2i*pi*(u1*dx + u2*dy)).
    """
    h, w_img = data.shape
    if window > min(h, w_img):
        raise DescriptorError(f"window {window} exceeds image {h}x{w_img}")
    r = (window - 1) // 2
    a = scale / window
    k = np.arange(-r, r + 1)
    cos_a = np.cos(2.0 * np.pi * a * k)
    sin_a = np.sin(2.0 * np.pi * a * k)
    ones = np.ones(window)

    # correlate along x (axis 1) with exp(-2i pi a dx) = cos - i sin
    re_x = _valid_corr_axis(data, cos_a, 1)
    im_x = _valid_corr_axis(data, -sin_a, 1)
    sum_x = _valid_corr_axis(data, ones, 1)

    out = np.empty((8, h - 2 * r, w_img - 2 * r))
    # u = (a, 0): x-exponential, flat in y
    out[0] = _valid_corr_axis(re_x, ones, 0)
    out[1] = _valid_corr_axis(im_x, ones, 0)
    # u = (0, a): flat in x, y-exponential
    out[2] = _valid_corr_axis(sum_x, cos_a, 0)
    out[3] = _valid_corr_axis(sum_x, -sin_a, 0)
    # u = (a, a): (re_x + i im_x) * (cos - i sin) along y
    out[4] = _valid_corr_axis(re_x, cos_a, 0) + _valid_corr_axis(im_x, sin_a, 0)
    out[5] = _valid_corr_axis(im_x, cos_a, 0) - _valid_corr_axis(re_x, sin_a, 0)
    # u = (a, -a): multiply by conjugate exponential along y
    out[6] = _valid_corr_axis(re_x, cos_a, 0) - _valid_corr_axis(im_x, sin_a, 0)
    out[7] = _valid_corr_axis(im_x, cos_a, 0) + _valid_corr_axis(re_x, sin_a, 0)
    return out


def _whitened(data: np.ndarray, cfg: LpqConfig) -> np.ndarray:
    coeff = stft_coefficients(data, cfg.window, cfg.scale)
    flat = coeff.reshape(8, -1)
    white = whitening_matrix(cfg.rho) @ flat
    return white.reshape(coeff.shape)


def _codes_binary(white: np.ndarray) -> np.ndarray:
    return pack_bits(white >= 0.0)


def _codes_ternary(white: np.ndarray, tau: float):
    std = white.reshape(8, -1).std(axis=1)
    std = np.where(std > 0, std, 1.0)
    scaled = white / std[:, None, None]
    pos = scaled >= tau
    neg = (-scaled >= tau) & ~pos
    return pack_bits(pos), pack_bits(neg)


def lpq_descriptor(img: GrayImage, cfg: LpqConfig = LpqConfig()) -> FeatureVector:
    """256-bin code histogram (tau=0), or the 512-value positive/negative
    concatenation when tau > 0 (whitened coefficients scaled by their
    per-component standard deviation before ternary coding)."""
    data = require_gray(img)
    white = _whitened(data, cfg)
    fp = config_fingerprint(window=cfg.window, scale=cfg.scale, rho=cfg.rho, tau=cfg.tau)
    if cfg.tau == 0.0:
        hist = l1_hist(_codes_binary(white), 256)
        return FeatureVector(hist, "LPQ", fp)
    pos, neg = _codes_ternary(white, cfg.tau)
    hist = np.concatenate([l1_hist(pos, 256), l1_hist(neg, 256)])
    return FeatureVector(hist, "LPQ", fp)


def mlpq_bank(img: GrayImage, windows=MLPQ_WINDOWS, scales=MLPQ_SCALES,
              taus=MLPQ_TAUS, rho: float = 0.9) -> list[FeatureVector]:
    """Ternary LPQ over the full parameter grid; 3*7*5 = 105 vectors by
    default, each meant for its own downstream classifier.  Coefficients are
    computed once per (window, scale) and shared across thresholds."""
    data = require_gray(img)
    white_mat = whitening_matrix(rho)
    out = []
    for w in windows:
        for s in scales:
            coeff = stft_coefficients(data, w, s)
            white = (white_mat @ coeff.reshape(8, -1)).reshape(coeff.shape)
            for tau in taus:
                pos, neg = _codes_ternary(white, tau)
                hist = np.concatenate([l1_hist(pos, 256), l1_hist(neg, 256)])
                fp = config_fingerprint(window=w, scale=s, rho=rho, tau=tau)
                out.append(FeatureVector(hist, f"MLPQ[w={w},s={s},tau={tau}]", fp))
    return out
