"""Coefficient perturbations: random zeroing, bounded noise, and same-class
swapping.  On the DCT path the DC coefficient (index (0, 0)) is protected
from all three; the PCA path protects nothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DC_INDEX = (0, 0)


class PerturbError(ValueError):
    pass


@dataclass(frozen=True)
class PerturbParams:
    """method: 'one' zeroes coefficients with probability zero_p; 'two' adds
    (sigma/2) * U(-1/2, 1/2) noise; 'three' overwrites positions from five
    same-class donors with probability swap_p per donor."""

    method: str = "one"
    zero_p: float = 0.5
    swap_p: float = 0.05
    n_donors: int = 5
    gaussian_noise: bool = False

    def __post_init__(self):
        if self.method not in ("one", "two", "three"):
            raise PerturbError(f"unknown method {self.method!r}")
        if not (0.0 <= self.zero_p <= 1.0 and 0.0 <= self.swap_p <= 1.0):
            raise PerturbError("probabilities must lie in [0, 1]")
        if self.n_donors < 1:
            raise PerturbError("need at least one donor")


def _protect_mask(shape, protect_dc: bool) -> np.ndarray | None:
    if not protect_dc:
        return None
    mask = np.zeros(shape, dtype=bool)
    mask[DC_INDEX if len(shape) == 2 else 0] = True
    return mask


def perturb_zero(coeffs: np.ndarray, p: float, rng: np.random.Generator,
                 protect_dc: bool = True) -> np.ndarray:
    """Independently zero each coefficient with probability p."""
    out = np.array(coeffs, dtype=np.float64)
    drop = rng.random(out.shape) < p
    keep = _protect_mask(out.shape, protect_dc)
    if keep is not None:
        drop &= ~keep
    out[drop] = 0.0
    return out


def perturb_noise(coeffs: np.ndarray, sigma_img: float, rng: np.random.Generator,
                  protect_dc: bool = True, gaussian: bool = False) -> np.ndarray:
    """Add (sigma_img/2) * z per coefficient, z uniform on (-1/2, 1/2) by
    default or standard normal in gaussian mode."""
    if sigma_img < 0:
        raise PerturbError("sigma must be >= 0")
    out = np.array(coeffs, dtype=np.float64)
    if gaussian:
        z = rng.standard_normal(out.shape)
    else:
        z = rng.random(out.shape) - 0.5
    delta = (sigma_img / 2.0) * z
    keep = _protect_mask(out.shape, protect_dc)
    if keep is not None:
        delta[keep] = 0.0
    return out + delta


def perturb_swap(coeffs: np.ndarray, donors: list[np.ndarray], p: float,
                 rng: np.random.Generator, protect_dc: bool = True) -> np.ndarray:
    """Overwrite positions from each donor in turn with probability p.

    Donors are processed in order, so a later donor can overwrite an earlier
    swap; every output position holds either the input value or some donor's
    value at that position."""
    out = np.array(coeffs, dtype=np.float64)
    keep = _protect_mask(out.shape, protect_dc)
    for donor in donors:
        donor = np.asarray(donor, dtype=np.float64)
        if donor.shape != out.shape:
            raise PerturbError(
                f"donor shape {donor.shape} does not match coefficients {out.shape}")
        take = rng.random(out.shape) < p
        if keep is not None:
            take &= ~keep
        out[take] = donor[take]
    return out
