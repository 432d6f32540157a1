"""Reproducible RNG plumbing.

Two primitives are used throughout:

* numpy's Philox (counter-based) generator for bulk draws inside one
  trajectory, identified in output metadata as ``PRNG_ID``;
* a splitmix64 avalanche mix for deriving independent 64-bit seeds and
  for stateless, order-independent clock draws keyed by
  (site, direction, clock index).
"""

from math import log

from numpy.random import Generator, Philox

PRNG_ID = "philox4x64(numpy) + splitmix64 key mix"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 finalization round (public-domain constants)."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, run_index: int) -> int:
    """Per-run 64-bit seed: splitmix64 of master advanced run_index+1 times.

    Equivalent to the splitmix64 output stream seeded at ``master``, so
    distinct run indices give independent-looking seeds and the map is
    injective in run_index for any fixed master (stream positions differ).
    """
    return splitmix64((master + run_index * _GOLDEN) & _MASK64)


def philox(seed: int) -> Generator:
    return Generator(Philox(key=seed & _MASK64))


def keyed_u64(seed: int, *words: int) -> int:
    """Stateless 64-bit output keyed by (seed, words...): chained splitmix64."""
    h = splitmix64(seed & _MASK64)
    for w in words:
        h = splitmix64((h ^ (w & _MASK64)) & _MASK64)
    return h


def keyed_uniform(seed: int, *words: int) -> float:
    """Uniform in (0, 1) from keyed_u64 (53-bit mantissa, zero avoided)."""
    u = (keyed_u64(seed, *words) >> 11) * 2.0**-53
    return u if u > 0.0 else 2.0**-53


def keyed_std_exponential(seed: int, *words: int) -> float:
    """Standard exponential via inverse CDF of the keyed uniform."""
    return -log(keyed_uniform(seed, *words))


class UniformBlocks:
    """Sequential uniform(0,1) draws from Philox, fetched in blocks.

    Consumes the generator stream exactly like repeated scalar
    ``Generator.random()`` calls, but amortizes the call overhead.
    """

    def __init__(self, seed: int, block: int = 1 << 14):
        self._gen = philox(seed)
        self._block = block
        self._buf = []
        self._i = 0

    def next(self) -> float:
        if self._i == len(self._buf):
            self._buf = self._gen.random(self._block).tolist()
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u
