"""Deterministic seed derivation and RNG construction.

All randomness in the package flows through the Philox 4x64 counter-based
generator, seeded via numpy's SeedSequence so that sub-streams (instance
generation, training episodes, evaluation episodes, network init) are
independent and reproducible across platforms.
"""

from __future__ import annotations

import numpy as np

# Stream tags for derive_seed; distinct per consumer so streams never collide.
STREAM_INSTANCE = 1
STREAM_TRAIN = 2
STREAM_EVAL = 3
STREAM_NET = 4
STREAM_POLICY = 5

_U64 = np.uint64


def derive_seed(base_seed: int, *path: int) -> int:
    """Derive a 64-bit sub-seed from a base seed and an integer path."""
    entropy = [_U64(base_seed & 0xFFFFFFFFFFFFFFFF)]
    entropy.extend(_U64(int(p) & 0xFFFFFFFFFFFFFFFF) for p in path)
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Philox-backed generator for the given 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=_U64(seed & 0xFFFFFFFFFFFFFFFF)))
