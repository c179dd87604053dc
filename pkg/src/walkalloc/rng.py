"""Seeded RNG plumbing: reproducible generators, substreams, and cell seeds."""
from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """A fresh PCG64 generator for the given seed (stable across runs)."""
    return np.random.default_rng(int(seed) & _MASK64)


def substream(seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial, derived as seed XOR trial-index."""
    return make_rng((int(seed) ^ int(trial_index)) & _MASK64)


def stable_cell_seed(base_seed: int, *parts: object) -> int:
    """64-bit seed for an experiment cell, stable across processes and platforms.

    Built from sha256 over the textual parts; Python's builtin hash() is
    per-process salted and must not be used here.
    """
    text = "|".join([str(base_seed), *(str(p) for p in parts)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
