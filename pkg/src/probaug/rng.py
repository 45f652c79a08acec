"""Deterministic seeding and a small splitmix64 stream.

Every stochastic component in the package draws from a splitmix64 stream
seeded through :func:`stable_seed`, so results are reproducible across
runs and platforms (Python's builtin ``hash`` is salted and unusable for
this). The numba tree kernels carry a bit-identical twin of the stream
(see ``learners.tree``).
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def stable_seed(*parts: int | str) -> int:
    """Derive a 64-bit seed from a sequence of ints/strings.

    Deterministic across processes and platforms; distinct part tuples
    give independent seeds for all practical purposes.
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        token = f"{type(p).__name__}:{p}".encode("utf-8")
        h.update(len(token).to_bytes(4, "little"))
        h.update(token)
    return int.from_bytes(h.digest(), "little")


def splitmix64_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, 64-bit output)."""
    state = (state + _GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    z = z ^ (z >> 31)
    return state, z


class SplitMix64:
    """Tiny deterministic RNG: uniform ints, bounded ints, shuffles."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state, out = splitmix64_next(self._state)
        return out

    def rand_below(self, n: int) -> int:
        """Uniform int in [0, n) via the multiply-shift bound (n < 2**32)."""
        if not 0 < n < (1 << 32):
            raise ValueError(f"rand_below bound out of range: {n}")
        return ((self.next_u64() >> 32) * n) >> 32

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of arange(n)."""
        perm = np.arange(n, dtype=np.int64)
        for i in range(n - 1, 0, -1):
            j = self.rand_below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
