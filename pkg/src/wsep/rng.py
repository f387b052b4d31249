"""Random streams for runs and campaigns.

Every trial draws from numpy's Philox (a counter-based generator) keyed by
``SeedSequence([master_seed, trial])``, so a trial's stream depends only on
those two integers, never on scheduling or on other trials.
"""

from __future__ import annotations

import numpy as np

_BUFFER = 4096


class Stream:
    """Buffered uniform doubles on top of a Philox ``Generator``."""

    def __init__(self, master_seed: int, trial: int = 0):
        if master_seed < 0 or trial < 0:
            raise ValueError("seeds must be non-negative")
        self.master_seed = master_seed
        self.trial = trial
        self._gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, trial])))
        self._buf: list[float] = []
        self._pos = 0

    def random(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BUFFER).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def below(self, k: int) -> int:
        """Uniform integer in [0, k); bias is at most k / 2**53."""
        if k <= 0:
            raise ValueError("k must be positive")
        return min(int(self.random() * k), k - 1)

    def bernoulli_mask(self, positions: int, p: float) -> int:
        """Bits of ``positions`` (a mask) kept independently with probability p."""
        out = 0
        while positions:
            low = positions & -positions
            if self.random() < p:
                out |= low
            positions ^= low
        return out

    def bits(self, n: int) -> int:
        """Uniform random n-bit mask."""
        return self.bernoulli_mask((1 << n) - 1, 0.5)
