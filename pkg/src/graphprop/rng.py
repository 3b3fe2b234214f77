"""Seeded pseudorandom generation with a platform-stable stream.

Implements PCG-XSH-RR-64/32: a 64-bit linear congruential core (multiplier
6364136223846793005, odd per-instance increment) whose high bits are mixed by
an xorshift and a data-dependent rotate into 32-bit outputs. The generator is
in-repo so that identical seeds give identical streams on every platform and
numpy version; nothing in the package draws randomness from anywhere else.

Conventions (fixed, relied on by tests):
- ``next_u64`` concatenates two 32-bit draws, first draw in the high word.
- ``random()`` maps a 64-bit draw to [0, 1) with 53-bit resolution.
- ``int_below(n)`` uses the multiply-shift range map ``(u32 * n) >> 32``.
  Its bias is < n/2**32, immaterial for the n <= 25000 used here.
- ``spawn()`` derives a child generator by passing one parent draw through
  SplitMix64, so consuming the child never moves the parent's stream.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MULT = 6364136223846793005
_DEFAULT_INC = 1442695040888963407  # (stream 721347520444481703 << 1) | 1


def splitmix64(x: int) -> int:
    """One SplitMix64 scramble step; a cheap 64-bit mixing function."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _output(state: int) -> int:
    """XSH-RR output permutation of a 64-bit LCG state word."""
    xorshifted = (((state >> 18) ^ state) >> 27) & 0xFFFFFFFF
    rot = state >> 59
    return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF


class Pcg32:
    """PCG-XSH-RR-64/32 generator; single-owner, not thread-shared."""

    __slots__ = ("_state", "_inc")

    def __init__(self, seed: int = 0, stream: int | None = None):
        inc = _DEFAULT_INC if stream is None else (((stream << 1) | 1) & _MASK64)
        self._inc = inc
        # Reference seeding: run the LCG once from 0, add the seed, run again.
        self._state = 0
        self._step()
        self._state = (self._state + (seed & _MASK64)) & _MASK64
        self._step()

    def _step(self) -> int:
        old = self._state
        self._state = (old * _MULT + self._inc) & _MASK64
        return old

    @property
    def state(self) -> int:
        return self._state

    @property
    def inc(self) -> int:
        return self._inc

    def next_u32(self) -> int:
        return _output(self._step())

    def next_u64(self) -> int:
        hi = self.next_u32()
        lo = self.next_u32()
        return (hi << 32) | lo

    def random(self) -> float:
        """Uniform float64 in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def int_below(self, n: int) -> int:
        """Uniform int in [0, n) via multiply-shift (see module docstring)."""
        if not 0 < n <= 0xFFFFFFFF:
            raise ValueError(f"int_below bound must be in [1, 2**32), got {n}")
        return (self.next_u32() * n) >> 32

    def spawn(self) -> "Pcg32":
        """Child generator on an independent stream (see module docstring)."""
        raw = self.next_u64()
        child = Pcg32(seed=splitmix64(raw), stream=splitmix64(raw ^ _MASK64))
        return child

    # -- block generation -------------------------------------------------
    # Vectorized draws delegated to the kernel backend; consuming k values
    # through fill_u32 leaves the stream exactly where k next_u32 calls would.

    def fill_u32(self, count: int) -> np.ndarray:
        from .kernels import pcg_fill_u32

        if count < 0:
            raise ValueError("count must be >= 0")
        out, new_state = pcg_fill_u32(self._state, self._inc, count)
        self._state = new_state
        return out

    def fill_random(self, count: int) -> np.ndarray:
        """Vectorized ``random()``: count float64 values in [0, 1)."""
        words = self.fill_u32(2 * count).astype(np.uint64)
        u64 = (words[0::2] << np.uint64(32)) | words[1::2]
        return (u64 >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform_matrix(self, rows: int, cols: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """Row-major (rows, cols) matrix of uniform draws in [lo, hi)."""
        flat = self.fill_random(rows * cols)
        return (lo + (hi - lo) * flat).reshape(rows, cols)
