"""Binary codes from learned independent-component filters, plus the
size/threshold sweep variant.  Filters are learned from training patches
only, with a fixed seed, so cross-validation folds stay leak-free."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..images import GrayImage
from .common import DescriptorError, FeatureVector, config_fingerprint, l1_hist, require_gray

FBSIF_SIZES = (3, 5, 7, 9, 11)
FBSIF_THRESHOLDS = (-9, -6, -3, 0, 3, 6, 9)
DEFAULT_BITS = 8
MIN_PATCH_FACTOR = 50


class IcaConvergenceError(DescriptorError):
    """Fixed-point iteration failed to settle; carries the iteration count."""

    def __init__(self, iterations: int, delta: float):
        super().__init__(
            f"ICA did not converge after {iterations} iterations (delta {delta:.3e})")
        self.iterations = iterations
        self.delta = delta


@dataclass(frozen=True)
class BsifFilterBank:
    """Learned filter matrix (n_bits x size^2) plus training provenance."""

    filters: np.ndarray
    size: int
    n_bits: int
    seed: int
    n_patches: int

    def __post_init__(self):
        filt = np.asarray(self.filters, dtype=np.float64)
        if filt.shape != (self.n_bits, self.size * self.size):
            raise DescriptorError(
                f"filter matrix {filt.shape} inconsistent with size {self.size}, bits {self.n_bits}")
        if self.n_bits > self.size * self.size - 1:
            raise DescriptorError("n_bits must leave at least one PCA direction out")
        norms = np.linalg.norm(filt, axis=1)
        if np.any(norms == 0):
            raise DescriptorError("zero filter row")
        object.__setattr__(self, "filters", filt)


def _symmetric_orth(w: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(w @ w.T)
    return (vecs / np.sqrt(vals)) @ vecs.T @ w


def _fastica(z: np.ndarray, seed: int, tol: float = 1e-6, max_iter: int = 1000) -> np.ndarray:
    """Symmetric FastICA with the tanh contrast on whitened rows z (n x m)."""
    n, m = z.shape
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1CA]))
    w = _symmetric_orth(rng.standard_normal((n, n)))
    delta = np.inf
    for _ in range(max_iter):
        wz = w @ z
        g = np.tanh(wz)
        g_prime = 1.0 - g * g
        w_new = (g @ z.T) / m - g_prime.mean(axis=1)[:, None] * w
        w_new = _symmetric_orth(w_new)
        delta = float(np.abs(np.abs(np.einsum("ij,ij->i", w_new, w)) - 1.0).max())
        w = w_new
        if delta < tol:
            return w
    raise IcaConvergenceError(max_iter, delta)


def bsif_learn_filters(patches: np.ndarray, size: int, n_bits: int = DEFAULT_BITS,
                       seed: int = 0) -> BsifFilterBank:
    """Learn an n_bits filter bank from flattened size*size patches.

    Patches lose their DC (per-patch mean), are centered feature-wise, and
    PCA-whitened down to n_bits dimensions; FastICA then rotates to maximally
    independent directions.  The returned rows act directly on raw patches.
    """
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 2 or patches.shape[1] != size * size:
        raise DescriptorError(f"patches must be (count, {size * size})")
    if patches.shape[0] < MIN_PATCH_FACTOR * size * size:
        raise DescriptorError(
            f"need at least {MIN_PATCH_FACTOR * size * size} patches, got {patches.shape[0]}")
    if n_bits > size * size - 1:
        raise DescriptorError("n_bits must be at most size^2 - 1")

    x = patches - patches.mean(axis=1, keepdims=True)
    mean_patch = x.mean(axis=0)
    x = x - mean_patch
    cov = x.T @ x / (x.shape[0] - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:n_bits]
    top_vals = vals[order]
    if top_vals.min() <= 0:
        raise DescriptorError("degenerate patch covariance")
    whitening = vecs[:, order].T / np.sqrt(top_vals)[:, None]
    z = whitening @ x.T
    unmixing = _fastica(z, seed)
    return BsifFilterBank(unmixing @ whitening, size, n_bits, seed, patches.shape[0])


def sample_patches(images, size: int, count: int, seed: int) -> np.ndarray:
    """Draw `count` random size*size patches from a list of GrayImage."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xBA7C4]))
    out = np.empty((count, size * size))
    n_img = len(images)
    if n_img == 0:
        raise DescriptorError("no images to sample patches from")
    for i in range(count):
        data = images[int(rng.integers(n_img))].data
        h, w = data.shape
        if h < size or w < size:
            raise DescriptorError(f"image {h}x{w} smaller than patch size {size}")
        r = int(rng.integers(h - size + 1))
        c = int(rng.integers(w - size + 1))
        out[i] = data[r:r + size, c:c + size].ravel()
    return out


def bsif_responses(data: np.ndarray, bank: BsifFilterBank) -> np.ndarray:
    """(n_bits, h', w') raw filter responses over every interior pixel."""
    size = bank.size
    h, w = data.shape
    if h < size or w < size:
        raise DescriptorError(f"image {h}x{w} smaller than filter {size}")
    out_h, out_w = h - size + 1, w - size + 1
    resp = np.zeros((bank.n_bits, out_h, out_w))
    filt = bank.filters.reshape(bank.n_bits, size, size)
    for dy in range(size):
        for dx in range(size):
            block = data[dy:dy + out_h, dx:dx + out_w]
            resp += filt[:, dy, dx][:, None, None] * block[None]
    return resp


def codes_from_responses(resp: np.ndarray, th: float) -> np.ndarray:
    """Bit i set iff response strictly exceeds th."""
    weights = 1 << np.arange(resp.shape[0], dtype=np.int64)
    return np.tensordot(weights, (resp > th).astype(np.int64), axes=(0, 0))


def bsif_descriptor(img: GrayImage, bank: BsifFilterBank, th: float = 0.0) -> FeatureVector:
    """L1-normalized 2^n_bits-bin histogram of thresholded filter codes."""
    data = require_gray(img)
    codes = codes_from_responses(bsif_responses(data, bank), th)
    fp = config_fingerprint(size=bank.size, n_bits=bank.n_bits, th=th, seed=bank.seed)
    return FeatureVector(l1_hist(codes, 1 << bank.n_bits), f"BSIF[size={bank.size},th={th}]", fp)


def fbsif_bank(img: GrayImage, banks: dict[int, BsifFilterBank],
               sizes=FBSIF_SIZES, thresholds=FBSIF_THRESHOLDS) -> list[FeatureVector]:
    """One vector per (size, threshold): 5*7 = 35 by default.  Responses are
    computed once per size and shared across thresholds."""
    data = require_gray(img)
    out = []
    for size in sizes:
        bank = banks[size]
        resp = bsif_responses(data, bank)
        for th in thresholds:
            codes = codes_from_responses(resp, th)
            fp = config_fingerprint(size=size, n_bits=bank.n_bits, th=th, seed=bank.seed)
            out.append(FeatureVector(l1_hist(codes, 1 << bank.n_bits),
                                     f"FBSIF[size={size},th={th}]", fp))
    return out
