"""Deterministic counter-based RNG shared by every stochastic component.

The generator is SplitMix64 evaluated at a monotonically increasing draw
counter (update equations in kernels.py). Because each draw depends only
on (seed, index), streams are identical under both kernel backends and
reproducible from the recorded seed alone. Named substreams derive their
seed from the parent seed and an FNV-1a hash of the name, so adding a new
consumer never shifts the draws of existing ones.
"""

import numpy as np

from . import kernels

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(text):
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def splitmix64(seed, index):
    """Single draw: the uniform in [0, 1) at position ``index`` of ``seed``'s stream."""
    return float(kernels.uniform_block(np.uint64(seed & _MASK64), np.uint64(index), 1)[0])


class Stream:
    """One named draw sequence with an explicit position counter."""

    def __init__(self, seed):
        self.seed = np.uint64(int(seed) & _MASK64)
        self.counter = 0

    def spawn(self, name):
        """Independent substream keyed by ``name``; does not consume draws."""
        child = (int(self.seed) ^ _fnv1a(name)) & _MASK64
        return Stream(child)

    def uniforms(self, n):
        """Next ``n`` uniforms in [0, 1), advancing the counter."""
        block = kernels.uniform_block(self.seed, np.uint64(self.counter), int(n))
        self.counter += int(n)
        return block

    def uniform(self):
        return float(self.uniforms(1)[0])

    def integers(self, n, bound):
        """``n`` ints uniform on [0, bound) via the floor-of-scaled-uniform map."""
        return np.minimum(
            (self.uniforms(n) * bound).astype(np.int64), bound - 1
        )

    def shuffle(self, items):
        """In-place Fisher-Yates shuffle of a list or 1-D array."""
        n = len(items)
        if n < 2:
            return items
        u = self.uniforms(n - 1)
        for i in range(n - 1, 0, -1):
            j = int(u[n - 1 - i] * (i + 1))
            if j > i:
                j = i
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n):
        idx = list(range(n))
        self.shuffle(idx)
        return np.asarray(idx, dtype=np.int64)
