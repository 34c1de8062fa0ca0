"""The six per-epoch augmentation protocols.

App1-App4 are geometric (flips, scaling, rotation, translation, shear with
progressively richer parameter draws).  App5 and App6 perturb subspace
coefficients (PCA and DCT respectively) with one of three methods, then
reconstruct and apply a final left-right flip with probability 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..images import ColorImage, GrayImage, resize_bilinear
from .dct import TransformError, dct2, idct2
from .geometric import GeoSpec, geometric_transform
from .pca import PcaBasis, pca_project, pca_reconstruct
from .perturb import PerturbParams, perturb_noise, perturb_swap, perturb_zero

WORK_SIZE = 224
METHOD_NAMES = ("one", "two", "three")


class AugmentError(ValueError):
    pass


@dataclass(frozen=True)
class AugmentContext:
    """Everything App5/App6 need beyond the image itself: fitted bases per
    channel key ('gray' or 'R'/'G'/'B'), a same-class donor image pool for
    the swap method, the perturbation defaults, and an optional forced
    method (None draws uniformly among the three per call)."""

    pca_bases: dict[str, PcaBasis] | None = None
    donor_pool: tuple = ()
    params: PerturbParams = PerturbParams()
    method: str | None = None
    work_size: int = WORK_SIZE

    def __post_init__(self):
        if self.method is not None and self.method not in METHOD_NAMES:
            raise AugmentError(f"unknown perturbation method {self.method!r}")


def sample_geo_spec(app: int, rng: np.random.Generator) -> GeoSpec:
    """Draw the app's geometric parameters in a fixed order."""
    flip_lr = bool(rng.random() < 0.5)
    if app == 1:
        return GeoSpec(flip_lr=flip_lr)
    flip_tb = bool(rng.random() < 0.5)
    scale = (float(rng.uniform(1.0, 2.0)), float(rng.uniform(1.0, 2.0)))
    if app == 2:
        return GeoSpec(flip_lr=flip_lr, flip_tb=flip_tb, scale=scale)
    rotate = float(rng.uniform(-10.0, 10.0))
    translate = (float(rng.uniform(0.0, 5.0)), float(rng.uniform(0.0, 5.0)))
    if app == 3:
        return GeoSpec(flip_lr=flip_lr, flip_tb=flip_tb, scale=scale,
                       rotate_deg=rotate, translate=translate)
    shear = (float(rng.uniform(0.0, 30.0)), float(rng.uniform(0.0, 30.0)))
    return GeoSpec(flip_lr=flip_lr, flip_tb=flip_tb, scale=scale,
                   rotate_deg=rotate, translate=translate, shear_deg=shear)


def _channel_planes(img) -> tuple[list[np.ndarray], list[str]]:
    if isinstance(img, ColorImage):
        return [img.data[:, :, c] for c in range(3)], ["R", "G", "B"]
    return [img.data], ["gray"]


def _perturb_dct(plane: np.ndarray, method: str, ctx: AugmentContext,
                 donors: list[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    coeffs = dct2(plane)
    if method == "one":
        coeffs = perturb_zero(coeffs, ctx.params.zero_p, rng, protect_dc=True)
    elif method == "two":
        coeffs = perturb_noise(coeffs, float(plane.std()), rng, protect_dc=True,
                               gaussian=ctx.params.gaussian_noise)
    else:
        donor_coeffs = [dct2(d) for d in donors]
        coeffs = perturb_swap(coeffs, donor_coeffs, ctx.params.swap_p, rng,
                              protect_dc=True)
    return idct2(coeffs)


def _perturb_pca(plane: np.ndarray, basis: PcaBasis, method: str,
                 ctx: AugmentContext, donors: list[np.ndarray],
                 rng: np.random.Generator) -> np.ndarray:
    coeffs = pca_project(plane, basis)
    if basis.degenerate:
        return pca_reconstruct(coeffs, basis)
    if method == "one":
        coeffs = perturb_zero(coeffs, ctx.params.zero_p, rng, protect_dc=False)
    elif method == "two":
        coeffs = perturb_noise(coeffs, float(plane.std()), rng, protect_dc=False,
                               gaussian=ctx.params.gaussian_noise)
    else:
        donor_coeffs = [pca_project(d, basis) for d in donors]
        coeffs = perturb_swap(coeffs, donor_coeffs, ctx.params.swap_p, rng,
                              protect_dc=False)
    return pca_reconstruct(coeffs, basis)


def _subspace_app(img, app: int, ctx: AugmentContext, rng: np.random.Generator):
    h, w = img.height, img.width
    size = ctx.work_size
    work = resize_bilinear(img, size, size)
    planes, keys = _channel_planes(work)

    method = ctx.method
    if method is None:
        method = METHOD_NAMES[int(rng.integers(len(METHOD_NAMES)))]

    donors_by_channel: dict[str, list[np.ndarray]] = {k: [] for k in keys}
    if method == "three":
        pool = ctx.donor_pool
        if not pool:
            raise AugmentError("swap perturbation needs a same-class donor pool")
        n = ctx.params.n_donors
        replace = len(pool) < n
        picks = rng.choice(len(pool), size=n, replace=replace)
        for idx in picks:
            donor = resize_bilinear(pool[int(idx)], size, size)
            d_planes, d_keys = _channel_planes(donor)
            if d_keys != keys:
                raise AugmentError("donor color mode differs from the sample")
            for k, p in zip(d_keys, d_planes):
                donors_by_channel[k].append(p)

    out_planes = []
    for key, plane in zip(keys, planes):
        if app == 6:
            new = _perturb_dct(plane, method, ctx, donors_by_channel[key], rng)
        else:
            if not ctx.pca_bases or key not in ctx.pca_bases:
                raise AugmentError(f"App5 needs a fitted PCA basis for channel {key}")
            new = _perturb_pca(plane, ctx.pca_bases[key], method, ctx,
                               donors_by_channel[key], rng)
        out_planes.append(np.clip(new, 0.0, 255.0))

    if isinstance(img, ColorImage):
        rebuilt = ColorImage(np.stack(out_planes, axis=-1), img.colorspace)
    else:
        rebuilt = GrayImage(out_planes[0])
    restored = resize_bilinear(rebuilt, w, h)
    if rng.random() < 0.5:
        restored = geometric_transform(restored, GeoSpec(flip_lr=True))
    return restored


def augment_image(img, app: int, ctx: AugmentContext, rng: np.random.Generator):
    """One augmented copy of `img` under protocol `app`; same type and size.

    All randomness comes from `rng`, so a keyed stream makes the output a
    pure function of (image, app, context, stream key)."""
    if app not in (1, 2, 3, 4, 5, 6):
        raise AugmentError(f"unknown augmentation protocol {app}")
    if app <= 4:
        return geometric_transform(img, sample_geo_spec(app, rng))
    if app == 6 and img.width != img.height and ctx.work_size is None:
        raise TransformError("DCT path needs a square working size")
    return _subspace_app(img, app, ctx, rng)
