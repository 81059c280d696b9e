"""Seeded, splittable random streams backed by Philox4x64-10."""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class SeededRng:
    """Counter-based generator keyed directly by a 64-bit seed.

    The seed is used verbatim as the first Philox key word, so the raw stream
    is fixed by the algorithm alone and does not depend on numpy's seed
    hashing. ``split`` derives independent child streams.
    """

    def __init__(self, seed: int, _stream: int = 0):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.stream = int(_stream)
        # an explicit uint64 array; a plain list goes through float and loses low bits
        self._bitgen = np.random.Philox(key=np.array([self.seed, self.stream], dtype=np.uint64))
        self.gen = np.random.Generator(self._bitgen)

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw uint64 outputs."""
        return self._bitgen.random_raw(n)

    def split(self) -> "SeededRng":
        child_key = int(self.raw(1)[0])
        return SeededRng(self.seed, _stream=child_key)

    def random(self, size=None):
        return self.gen.random(size)

    def uniform(self, low: float, high: float, size=None):
        return self.gen.uniform(low, high, size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self.gen.normal(loc, scale, size)

    def integers(self, low: int, high: int | None = None, size=None):
        return self.gen.integers(low, high, size)

    def choice(self, a, size=None, replace: bool = True):
        return self.gen.choice(a, size=size, replace=replace)

    def permutation(self, n: int) -> np.ndarray:
        return self.gen.permutation(n)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"
