"""Deterministic seed derivation.

All randomness in the package flows from 64-bit unsigned seeds through
numpy's default PCG64 generator (``np.random.default_rng``), whose normal
sampler is the ziggurat algorithm. Derived seeds are produced by
:func:`mix64`, a SplitMix64 finalizer applied to ``seed XOR stream * GAMMA``.
The mixing function is fixed so that adding worker threads, reordering
trials, or re-running on another platform never changes a derived stream.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(seed: int, stream: int) -> int:
    """Derive a child seed from (seed, stream) with SplitMix64 finalization."""
    z = (int(seed) ^ ((int(stream) * _GAMMA) & _MASK64)) & _MASK64
    z = (z + _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def rng_from(seed: int) -> np.random.Generator:
    """The one generator construction used everywhere in the package."""
    return np.random.default_rng(int(seed) & _MASK64)
