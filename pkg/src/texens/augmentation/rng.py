"""Deterministic per-(sample, epoch, purpose) random streams.

Keying the generator on a digest of the full stream identity makes every
draw reproducible under any parallel schedule or evaluation order."""

from __future__ import annotations

import hashlib

import numpy as np


def stream_key(seed: int, sample_id: str, epoch: int, purpose: str) -> str:
    return f"{seed}|{sample_id}|{epoch}|{purpose}"


def rng_stream(seed: int, sample_id: str, epoch: int, purpose: str) -> np.random.Generator:
    """Independent generator for one (seed, sample, epoch, purpose) tuple."""
    digest = hashlib.sha256(stream_key(seed, sample_id, epoch, purpose).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))
