"""Bit-mask helpers for exhaustive sweeps over subsets of Z/q.

A subset of Z/q is an integer mask with bit i set iff i is a member.  The
tables here let sweeps over all 4^q pairs run as vectorized numpy passes.
"""

from __future__ import annotations

import numpy as np


def popcounts(q: int) -> np.ndarray:
    """popcount of every mask in [0, 2^q)."""
    n = 1 << q
    out = np.zeros(n, dtype=np.int64)
    for i in range(q):
        out += (np.arange(n) >> i) & 1
    return out


def rotation_tables(q: int) -> list[np.ndarray]:
    """tables[a][m] = mask of (set(m) + a mod q), for every mask m."""
    n = 1 << q
    masks = np.arange(n, dtype=np.int64)
    full = n - 1
    tables = []
    for a in range(q):
        rot = ((masks << a) | (masks >> (q - a))) & full if a else masks.copy()
        tables.append(rot)
    return tables


def sumset_masks(a_mask: int, all_b: np.ndarray, rot: list[np.ndarray]) -> np.ndarray:
    """Cyclic sumset masks of one A against a vector of B masks."""
    out = np.zeros_like(all_b)
    a = a_mask
    while a:
        low = a & -a
        out |= rot[low.bit_length() - 1][all_b]
        a ^= low
    return out
