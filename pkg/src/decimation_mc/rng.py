"""Counter-based uniform variates: SplitMix64 evaluated at arbitrary positions.

A draw is a pure function of ``(seed, counter)``::

    key   = mix64(seed + GAMMA)
    x     = mix64(key + (counter + 1) * GAMMA)      (mod 2**64)
    u     = (x >> 11) * 2**-53                     in [0, 1)

with ``GAMMA = 0x9E3779B97F4A7C15`` and the SplitMix64 finaliser::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

The sweep kernels use counter ``sweep * draws_per_sweep + slot``, so every
backend and every platform sees the same stream for a given seed.
"""
from __future__ import annotations

import numpy as np

from ._backend import njit

GAMMA = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1
INV_2_53 = 1.0 / 9007199254740992.0

_G = np.uint64(GAMMA)
_M1 = np.uint64(MUL1)
_M2 = np.uint64(MUL2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int) -> int:
    """Per-seed key; seeds are reduced modulo 2**64."""
    return mix64((int(seed) + GAMMA) & MASK64)


def uniform(key: int, counter: int) -> float:
    """Reference scalar draw (pure Python integers)."""
    x = mix64((key + (counter + 1) * GAMMA) & MASK64)
    return (x >> 11) * INV_2_53


def uniforms(key: int, start: int, count: int) -> np.ndarray:
    """Vectorised draws for counters ``start .. start + count - 1``."""
    ctr = np.arange(count, dtype=np.uint64) + np.uint64(start + 1)
    z = np.uint64(key) + ctr * _G
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return (z >> _S11).astype(np.float64) * INV_2_53


@njit(inline="always")
def uniform_nb(key, counter):
    z = key + (counter + _ONE) * _G
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return np.float64(z >> _S11) * INV_2_53


class CounterRNG:
    """Stateful convenience wrapper (used outside the hot kernels)."""

    def __init__(self, seed: int, counter: int = 0):
        self.seed = int(seed)
        self.key = stream_key(seed)
        self.counter = int(counter)

    def random(self, size: int | None = None):
        if size is None:
            u = uniform(self.key, self.counter)
            self.counter += 1
            return u
        out = uniforms(self.key, self.counter, size)
        self.counter += size
        return out
