"""Reproducible seed derivation.

A single 64-bit root seed is split into per-replica seeds with a SplitMix64
finalizer applied to ``root + (index + 1) * golden``.  For a fixed root the
map ``index -> seed`` is a bijection on 64-bit integers, so derived seeds
never collide.  Each derived seed then feeds numpy's ``SeedSequence`` with a
``spawn_key`` naming the stream purpose (Gaussian noise, auxiliary
uniforms, jump clock), giving independent PCG64 streams.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = [
    "DEFAULT_SEED",
    "SEED_ENV",
    "Stream",
    "derive_seed",
    "derive_seeds",
    "stream",
    "default_seed",
]

DEFAULT_SEED = 0x5EED
SEED_ENV = "RATCHETLAB_SEED"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class Stream:
    """Purpose codes of the per-replica random streams."""

    NOISE = 0
    AUX = 1
    JUMPS = 2
    CHAIN = 3


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def derive_seed(root: int, index: int) -> int:
    """64-bit seed of replica ``index`` under ``root``."""
    return _mix64((int(root) + (int(index) + 1) * _GOLDEN) & _MASK)


def derive_seeds(root: int, indices) -> np.ndarray:
    """Vectorized :func:`derive_seed` returning a uint64 array."""
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(int(root) & _MASK) + (idx + np.uint64(1)) * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def stream(seed: int, purpose: int) -> np.random.Generator:
    """PCG64 generator for one (seed, purpose) pair."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK, spawn_key=(int(purpose),))
    return np.random.Generator(np.random.PCG64(ss))


def default_seed(env: dict | None = None) -> int:
    """Seed from ``$RATCHETLAB_SEED`` (decimal or 0x-hex), else 0x5EED."""
    env = os.environ if env is None else env
    raw = env.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    return int(raw.strip(), 0)
