"""SplitMix64 seed expansion.

One 64-bit seed fans out to independent per-tree (or per-cell) seeds; each
derived seed depends only on the parent seed and the index, never on the
order in which work is scheduled.
"""

from __future__ import annotations

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """The SplitMix64 finaliser applied to ``x + golden ratio``."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Seed for the node at ``path`` below ``seed`` in a tree of seeds."""
    z = splitmix64(int(seed) & MASK64)
    for p in path:
        z = splitmix64(z ^ splitmix64(int(p) & MASK64))
    return z


@numba.njit(cache=True)
def _next(state):
    """Advance a one-element uint64 state array and return 64 random bits."""
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def sample_without_replacement(state, n, k):
    """Sorted uniform ``k``-subset of ``range(n)`` (partial Fisher-Yates)."""
    pool = np.arange(n)
    for i in range(k):
        r = np.int64(_next(state) % np.uint64(n - i))
        j = i + r
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
    return np.sort(pool[:k])
