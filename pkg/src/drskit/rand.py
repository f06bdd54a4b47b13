"""Deterministic 64-bit RNG shared by the search kernels and the batch mixer.

splitmix64 is used instead of the stdlib Mersenne generator so that the
compiled and pure-Python search kernels can reproduce each other bit for bit,
and so batch streams stay byte-identical across Python versions.
"""
from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """One splitmix64 output step applied to ``z``."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *stream: int) -> int:
    """Derive a per-stream seed from a master seed.

    Used to give every document (or epoch) its own deterministic seed so
    that parallel and serial runs agree regardless of scheduling order.
    """
    h = master & _MASK64
    for v in stream:
        h = mix64(h ^ ((v + 1) * _GOLDEN))
    return h


class SplitMix64:
    """Tiny deterministic RNG; mirrored verbatim in the C kernel."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def randbelow(self, n: int) -> int:
        """Uniform-ish integer in [0, n). n must be positive."""
        return self.next_u64() % n

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            seq[i], seq[j] = seq[j], seq[i]
