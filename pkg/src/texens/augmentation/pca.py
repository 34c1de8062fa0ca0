"""Per-channel principal-component basis fitted on training images only."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dct import TransformError


@dataclass(frozen=True)
class PcaBasis:
    """Mean vector and orthonormal component rows for flattened n*n channels.

    `degenerate` marks a rank-0 fit (all training channels identical);
    projection then yields an empty coefficient vector and reconstruction
    returns the mean."""

    mean: np.ndarray
    components: np.ndarray  # (m, d)
    explained: np.ndarray  # variance share per component
    side: int
    channel: str = ""
    provenance: str = ""

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).ravel()
        comp = np.asarray(self.components, dtype=np.float64).reshape(-1, mean.size)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "explained", np.asarray(self.explained, dtype=np.float64))
        if mean.size != self.side * self.side:
            raise TransformError("mean length inconsistent with side")

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.n_components == 0


def fit_pca(channels: list[np.ndarray], keep: float = 0.95,
            channel: str = "", provenance: str = "") -> PcaBasis:
    """Fit a basis on flattened square channels, keeping the smallest number
    of singular directions whose variance share reaches `keep`."""
    if len(channels) < 2:
        raise TransformError("PCA needs at least 2 training images")
    side = channels[0].shape[0]
    for ch in channels:
        if ch.ndim != 2 or ch.shape != (side, side):
            raise TransformError("all training channels must be square and same size")
    x = np.stack([ch.ravel() for ch in channels]).astype(np.float64)
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    power = s * s
    total = power.sum()
    if total <= 1e-12 * max(1.0, float(np.abs(x).max()) ** 2):
        return PcaBasis(mean, np.empty((0, mean.size)), np.empty(0), side,
                        channel, provenance)
    share = power / total
    cum = np.cumsum(share)
    m = int(np.searchsorted(cum, keep - 1e-12) + 1)
    m = min(m, int((s > s[0] * 1e-10).sum()))
    return PcaBasis(mean, vt[:m], share[:m], side, channel, provenance)


def pca_project(channel: np.ndarray, basis: PcaBasis) -> np.ndarray:
    flat = np.asarray(channel, dtype=np.float64).ravel()
    if flat.size != basis.mean.size:
        raise TransformError(
            f"channel has {flat.size} values, basis expects {basis.mean.size}")
    return basis.components @ (flat - basis.mean)


def pca_reconstruct(coeffs: np.ndarray, basis: PcaBasis) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64).ravel()
    if coeffs.size != basis.n_components:
        raise TransformError(
            f"{coeffs.size} coefficients for a {basis.n_components}-component basis")
    flat = basis.mean + basis.components.T @ coeffs
    return flat.reshape(basis.side, basis.side)
