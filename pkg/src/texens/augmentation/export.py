"""Write augmented epochs to disk with a reproducible manifest.

Layout: out/epoch_<e>/<class>/<filename>.png, one file per (epoch, sample).
When a fold plan is supplied, only training-fold samples are exported and all
fitting (PCA bases) and donor pools draw from the training fold alone."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from ..datasets import Dataset, FoldPlan
from ..images import ColorImage, GrayImage, load_image, resize_bilinear
from .apps import WORK_SIZE, AugmentContext, augment_image
from .pca import fit_pca
from .perturb import PerturbParams
from .rng import rng_stream, stream_key

MANIFEST_NAME = "manifest.tsv"
MANIFEST_HEADER = "epoch\tsample_id\tclass\tapp\tseed\tkey"


class LeakageError(RuntimeError):
    """Raised when a fitting step would touch a test-fold sample."""


def _check_fit_ids(fit_ids, allowed, what: str):
    bad = sorted(set(fit_ids) - set(allowed))
    if bad:
        raise LeakageError(f"{what} would be fitted on non-training samples: {bad[:5]}")


def fit_pca_bases(images_by_id: dict, fit_ids, train_ids, work_size: int = WORK_SIZE,
                  provenance: str = "") -> dict:
    """Per-channel PCA bases from the given training samples.

    `fit_ids` must be a subset of `train_ids`; anything else is a hard
    error, so a test image can never shape the basis."""
    _check_fit_ids(fit_ids, train_ids, "PCA basis")
    resized = [resize_bilinear(images_by_id[i], work_size, work_size) for i in sorted(fit_ids)]
    if not resized:
        raise LeakageError("no training samples to fit PCA on")
    if isinstance(resized[0], ColorImage):
        keys = ["R", "G", "B"]
        planes = {k: [im.data[:, :, c] for im in resized] for c, k in enumerate(keys)}
    else:
        planes = {"gray": [im.data for im in resized]}
    return {k: fit_pca(v, channel=k, provenance=provenance) for k, v in planes.items()}


def _to_png(img, path: Path):
    if isinstance(img, ColorImage):
        arr = np.rint(np.clip(img.data, 0, 255)).astype(np.uint8)
        PILImage.fromarray(arr, mode="RGB").save(path)
    else:
        arr = np.rint(np.clip(img.data, 0, 255)).astype(np.uint8)
        PILImage.fromarray(arr, mode="L").save(path)


def export_augmented(ds: Dataset, app: int, epochs: int, seed: int, out_dir,
                     plan: FoldPlan | None = None, fold: int | None = None,
                     method: str | None = None, params: PerturbParams = PerturbParams(),
                     work_size: int = WORK_SIZE) -> Path:
    """Export `epochs` augmented copies of the (training) set; returns the
    manifest path.  Rerunning with identical arguments reproduces every byte."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if (plan is None) != (fold is None):
        raise ValueError("plan and fold must be supplied together")
    if plan is not None:
        allowed = set(plan.train_ids(fold))
    else:
        allowed = {s.sample_id for s in ds.samples}

    samples = [s for s in ds.samples if s.sample_id in allowed]
    images = {s.sample_id: load_image(s.path) for s in samples}

    bases = None
    if app == 5:
        bases = fit_pca_bases(images, sorted(allowed), sorted(allowed),
                              work_size, provenance=f"seed={seed},fold={fold}")

    by_class: dict[int, list[str]] = {}
    for s in samples:
        by_class.setdefault(s.label, []).append(s.sample_id)

    rows = []
    for epoch in range(1, epochs + 1):
        for s in samples:
            cname = ds.class_names[s.label - 1]
            pool = tuple(images[i] for i in by_class[s.label])
            ctx = AugmentContext(pca_bases=bases, donor_pool=pool,
                                 params=params, method=method, work_size=work_size)
            key = stream_key(seed, s.sample_id, epoch, f"app{app}")
            rng = rng_stream(seed, s.sample_id, epoch, f"app{app}")
            aug = augment_image(images[s.sample_id], app, ctx, rng)
            dest = out / f"epoch_{epoch}" / cname
            dest.mkdir(parents=True, exist_ok=True)
            fname = Path(s.path).stem + ".png"
            _to_png(aug, dest / fname)
            rows.append((epoch, s.sample_id, cname, app, seed, key))

    manifest = out / MANIFEST_NAME
    with open(manifest, "w") as fh:
        fh.write(MANIFEST_HEADER + "\n")
        for row in sorted(rows, key=lambda r: (r[0], r[1])):
            fh.write("\t".join(str(x) for x in row) + "\n")
    return manifest
