"""Seed derivation. Every random draw in the package comes from a key path
rooted at one base seed, e.g. ``(run_seed, attempt)`` for a basis or
``(search_seed, step, realization)`` for a disturbance."""

from __future__ import annotations

import numpy as np


def derive_seed(*keys: int) -> int:
    """Deterministic 64-bit seed from a tuple of non-negative integers."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(*keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*keys))
