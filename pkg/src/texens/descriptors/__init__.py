"""Handcrafted descriptor registry and the per-image extraction driver."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..images import ColorImage, GrayImage
from .ahp import AhpConfig, ahp_descriptor
from .bsif import (
    BsifFilterBank,
    IcaConvergenceError,
    bsif_descriptor,
    bsif_learn_filters,
    fbsif_bank,
    sample_patches,
)
from .clbp import ClbpMaps, clbp_descriptor, clbp_maps
from .color import col_descriptor
from .common import (
    CodeMap,
    DescriptorError,
    FeatureVector,
    NeighborhoodConfig,
    config_fingerprint,
    l1_hist,
    mapping_bins,
    uniform_mapping,
)
from .etas import etas_descriptor
from .lbp import lbp_codes
from .lpq import LpqConfig, lpq_descriptor, mlpq_bank
from .ltp import LtpConfig, ltp_descriptor
from .morphology import mor_descriptor
from .ric import RicConfig, ric_descriptor

FH_PRIME_MEMBERS = ("ltp", "mlpq", "clbp", "ric", "ahp", "fbsif", "col", "etas", "mor")

# name -> (needs_color_image, needs_bsif_banks, callable(img, ctx) -> list[FeatureVector])
_REGISTRY = {
    "ltp": (False, False, lambda img, ctx: [ltp_descriptor(img)]),
    "mlpq": (False, False, lambda img, ctx: mlpq_bank(img)),
    "clbp": (False, False, lambda img, ctx: [clbp_descriptor(img)]),
    "ric": (False, False, lambda img, ctx: [ric_descriptor(img)]),
    "ahp": (False, False, lambda img, ctx: [ahp_descriptor(img)]),
    "fbsif": (False, True, lambda img, ctx: fbsif_bank(img, ctx.bsif_banks)),
    "col": (True, False, lambda img, ctx: [col_descriptor(img)]),
    "etas": (False, False, lambda img, ctx: [etas_descriptor(img)]),
    "mor": (False, False, lambda img, ctx: [mor_descriptor(img)]),
}


def descriptor_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


@dataclass(frozen=True)
class ExtractionContext:
    """Fold-dependent state needed by some descriptors (learned filter banks)."""

    bsif_banks: dict[int, BsifFilterBank] | None = None


def extract_all(img, which, context: ExtractionContext | None = None
                ) -> dict[str, list[FeatureVector]]:
    """Run the requested descriptors on one image.

    Grayscale descriptors run once on a gray image and once per R/G/B plane
    on a true color image (each vector tagged with its channel); the color
    statistics descriptor runs once and only on color input.
    """
    context = context or ExtractionContext()
    out: dict[str, list[FeatureVector]] = {}
    for name in which:
        if name not in _REGISTRY:
            raise DescriptorError(
                f"unknown descriptor {name!r}; valid: {', '.join(descriptor_names())}")
        needs_color, needs_banks, fn = _REGISTRY[name]
        if needs_banks and not context.bsif_banks:
            raise DescriptorError(f"{name} needs learned filter banks in the context")
        if needs_color:
            if not isinstance(img, ColorImage):
                raise DescriptorError("COL requires color")
            out[name] = fn(img, context)
            continue
        if isinstance(img, ColorImage):
            vectors = []
            for c, ch in enumerate(("R", "G", "B")):
                for fv in fn(img.channel(c), context):
                    vectors.append(replace(fv, tag=f"{fv.tag}@{ch}"))
            out[name] = vectors
        else:
            out[name] = fn(img, context)
    return out


__all__ = [
    "AhpConfig", "ahp_descriptor", "BsifFilterBank", "IcaConvergenceError",
    "bsif_descriptor", "bsif_learn_filters", "fbsif_bank", "sample_patches",
    "ClbpMaps", "clbp_descriptor", "clbp_maps", "col_descriptor", "CodeMap",
    "DescriptorError", "FeatureVector", "NeighborhoodConfig",
    "config_fingerprint", "l1_hist", "mapping_bins", "uniform_mapping",
    "etas_descriptor", "lbp_codes", "LpqConfig", "lpq_descriptor", "mlpq_bank",
    "LtpConfig", "ltp_descriptor", "mor_descriptor", "RicConfig",
    "ric_descriptor", "ExtractionContext", "extract_all", "descriptor_names",
    "FH_PRIME_MEMBERS",
]
