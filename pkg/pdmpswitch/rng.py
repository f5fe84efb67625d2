"""Deterministic random numbers.

Every run owns a RandomStream built on numpy's counter based Philox bit
generator. Per-run seeds come from splitmix64(base_seed, k), so an ensemble
is reproducible regardless of the order in which its runs are executed.
"""

import math

import numpy as np

from pdmpswitch.errors import DomainError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_BUFFER = 4096


def splitmix64(base_seed: int, k: int) -> int:
    z = (base_seed + (k + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, k: int) -> int:
    return splitmix64(base_seed & MASK64, k)


class RandomStream:
    """Buffered uniforms on (0, 1) from a Philox generator."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._gen = np.random.Generator(np.random.Philox(self.seed))
        self._buf: list[float] = []
        self._pos = 0

    def _refill(self) -> None:
        self._buf = self._gen.random(_BUFFER).tolist()
        self._pos = 0

    def uniform(self) -> float:
        while True:
            if self._pos >= len(self._buf):
                self._refill()
            u = self._buf[self._pos]
            self._pos += 1
            if u > 0.0:
                return u

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])

    def exponential(self, rate: float) -> float:
        return sample_switch_time(rate, self)


def sample_switch_time(rate: float, rng) -> float:
    """Exp(rate) holding time by inverse CDF: -ln(U)/rate."""
    if not rate > 0:
        raise DomainError("sample_switch_time()", rate, "rate must be > 0")
    return -math.log(rng.uniform()) / rate
