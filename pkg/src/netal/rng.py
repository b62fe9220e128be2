"""Deterministic seed derivation for nested run/chain random streams.

Every stochastic component derives its seed as splitmix64 hashes of a
single master seed plus integer indices, so results depend only on the
master seed and never on thread scheduling.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _finalize(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Hash a 64-bit seed with one or more stream indices.

    derive_seed(master, run_index) gives per-run seeds; chaining
    derive_seed(run_seed, chain_index) nests per-chain streams.
    """
    state = seed & _MASK
    for idx in indices:
        state = _finalize(state + _GOLDEN * (idx + 1))
    return state


class SplitMix64:
    """Tiny counter-based generator; mirrors the in-kernel stream bit for bit."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _finalize(self._state)

    def uniform(self) -> float:
        # 53-bit mantissa in [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, n: int) -> int:
        return self.next_u64() % n
