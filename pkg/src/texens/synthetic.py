"""Synthetic three-class texture benchmark: oriented sinusoidal gratings,
checkerboards, and noise fields.

The generator is a pure function of its seed, so a fixed seed pins every
pixel of the dataset.  Class structure is easy enough that a working
descriptor ensemble should be nearly perfect, which makes the benchmark a
sharp end-to-end regression check rather than a hard recognition problem.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .datasets import Dataset, load_dataset
from .images import GrayImage

CLASS_NAMES = ("checker", "grating", "noise")


def _grating(rng: np.random.Generator, side: int) -> np.ndarray:
    ys, xs = np.mgrid[0:side, 0:side]
    freq = rng.uniform(0.08, 0.25)
    theta = rng.uniform(0.0, np.pi)
    phase = rng.uniform(0.0, 2 * np.pi)
    amp = rng.uniform(40.0, 90.0)
    arg = 2 * np.pi * freq * (xs * np.cos(theta) + ys * np.sin(theta)) + phase
    return 128.0 + amp * np.sin(arg)


def _checker(rng: np.random.Generator, side: int) -> np.ndarray:
    ys, xs = np.mgrid[0:side, 0:side]
    cell = int(rng.integers(3, 9))
    ox, oy = rng.integers(0, cell, size=2)
    amp = rng.uniform(40.0, 90.0)
    pattern = (((xs + ox) // cell + (ys + oy) // cell) % 2) * 2.0 - 1.0
    return 128.0 + amp * pattern


def _noise_field(rng: np.random.Generator, side: int) -> np.ndarray:
    sigma = rng.uniform(30.0, 60.0)
    return rng.normal(128.0, sigma, size=(side, side))


_MAKERS = {"checker": _checker, "grating": _grating, "noise": _noise_field}


def synthetic_image(class_name: str, rng: np.random.Generator,
                    side: int = 64, pixel_noise: float = 8.0) -> GrayImage:
    """One sample of the named class with additive pixel noise."""
    base = _MAKERS[class_name](rng, side)
    noisy = base + rng.normal(0.0, pixel_noise, size=(side, side))
    return GrayImage(np.clip(np.rint(noisy), 0.0, 255.0))


def synthetic_images(n_per_class: int = 50, side: int = 64, seed: int = 0,
                     pixel_noise: float = 8.0) -> dict[str, list[GrayImage]]:
    """In-memory benchmark: class name -> list of images.

    Each (class, index) pair gets its own child generator, so the pixels of
    one sample never depend on how many others were generated before it."""
    out: dict[str, list[GrayImage]] = {}
    for c_idx, name in enumerate(CLASS_NAMES):
        rows = []
        for i in range(n_per_class):
            rng = np.random.default_rng(np.random.SeedSequence([seed, c_idx, i]))
            rows.append(synthetic_image(name, rng, side, pixel_noise))
        out[name] = rows
    return out


def generate_synthetic_dataset(root, n_per_class: int = 50, side: int = 64,
                               seed: int = 0, pixel_noise: float = 8.0) -> Dataset:
    """Write the benchmark as PNGs under `root`/<class>/ and load it back."""
    root = Path(root)
    by_class = synthetic_images(n_per_class, side, seed, pixel_noise)
    for name, imgs in by_class.items():
        d = root / name
        d.mkdir(parents=True, exist_ok=True)
        for i, img in enumerate(imgs):
            arr = img.data.astype(np.uint8)
            PILImage.fromarray(arr, mode="L").save(d / f"{name}_{i:03d}.png")
    return load_dataset(root)
