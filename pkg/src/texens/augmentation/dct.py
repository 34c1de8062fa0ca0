"""Orthonormal 2-D type-II discrete cosine transform and its inverse."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class TransformError(ValueError):
    """Raised for non-square inputs or size mismatches."""


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    """C[p, q] = a_p * cos(pi * (2q+1) * p / (2n)), a_0 = sqrt(1/n),
    a_p = sqrt(2/n) otherwise; rows are orthonormal."""
    if n < 1:
        raise TransformError("transform size must be >= 1")
    p = np.arange(n)[:, None]
    q = np.arange(n)[None, :]
    mat = np.cos(np.pi * (2 * q + 1) * p / (2 * n))
    scale = np.full(n, np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    mat = scale[:, None] * mat
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True)
class DctPlan:
    """Transform size and the scaling factors that make C orthonormal."""

    n: int

    @property
    def matrix(self) -> np.ndarray:
        return dct_matrix(self.n)

    @property
    def scaling(self) -> np.ndarray:
        scale = np.full(self.n, np.sqrt(2.0 / self.n))
        scale[0] = np.sqrt(1.0 / self.n)
        return scale


def dct2(channel: np.ndarray) -> np.ndarray:
    """2-D DCT of a square matrix: C @ M @ C.T."""
    m = np.asarray(channel, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise TransformError(f"dct2 needs a square 2-D input, got {m.shape}")
    c = dct_matrix(m.shape[0])
    return c @ m @ c.T


def idct2(coefficients: np.ndarray) -> np.ndarray:
    """Inverse 2-D DCT: C.T @ coeffs @ C."""
    m = np.asarray(coefficients, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise TransformError(f"idct2 needs a square 2-D input, got {m.shape}")
    c = dct_matrix(m.shape[0])
    return c.T @ m @ c
