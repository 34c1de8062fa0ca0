"""Data augmentation: geometric protocols, subspace-coefficient
perturbations, seeded random streams, and augmented-set export."""

from .apps import AugmentContext, AugmentError, augment_image, sample_geo_spec
from .dct import DctPlan, TransformError, dct2, dct_matrix, idct2
from .export import LeakageError, export_augmented, fit_pca_bases
from .geometric import GeoError, GeoSpec, geometric_transform
from .pca import PcaBasis, fit_pca, pca_project, pca_reconstruct
from .perturb import PerturbError, PerturbParams, perturb_noise, perturb_swap, perturb_zero
from .rng import rng_stream, stream_key

__all__ = [
    "AugmentContext", "AugmentError", "augment_image", "sample_geo_spec",
    "DctPlan", "TransformError", "dct2", "dct_matrix", "idct2",
    "LeakageError", "export_augmented", "fit_pca_bases",
    "GeoError", "GeoSpec", "geometric_transform",
    "PcaBasis", "fit_pca", "pca_project", "pca_reconstruct",
    "PerturbError", "PerturbParams", "perturb_noise", "perturb_swap", "perturb_zero",
    "rng_stream", "stream_key",
]
