"""Exact integer convolutions backed by verified-rounding real FFTs.

All inputs are nonnegative integer arrays (usually 0/1 indicators).  The FFT
path is only trusted when every output lands within ROUND_TOL of an integer;
otherwise the caller falls back to a direct method.  For lengths up to 2**20
and counts up to 2**26 the float64 FFT error is orders of magnitude below the
tolerance.
"""

from __future__ import annotations

import numpy as np

ROUND_TOL = 0.125


class RoundingError(RuntimeError):
    """FFT output strayed too far from the integer lattice."""


def _verified_round(raw: np.ndarray) -> np.ndarray:
    rounded = np.rint(raw)
    err = float(np.max(np.abs(raw - rounded))) if raw.size else 0.0
    if err > ROUND_TOL:
        raise RoundingError(f"convolution rounding error {err:.3g} exceeds {ROUND_TOL}")
    out = rounded.astype(np.int64)
    out[out < 0] = 0
    return out


def cyclic_convolve_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact cyclic convolution c[x] = sum_{u+v=x mod Q} a[u] b[v]."""
    q = len(a)
    if q != len(b):
        raise ValueError("cyclic convolution needs equal lengths")
    if q == 0:
        return np.zeros(0, dtype=np.int64)
    raw = np.fft.irfft(np.fft.rfft(a.astype(np.float64)) * np.fft.rfft(b.astype(np.float64)), n=q)
    return _verified_round(raw)


def linear_convolve_exact(a: np.ndarray, b: np.ndarray, limit: int | None = None) -> np.ndarray:
    """Exact linear convolution, optionally truncated to indices < limit."""
    n = len(a) + len(b) - 1
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, dtype=np.int64)
    size = 1
    while size < n:
        size *= 2
    fa = np.fft.rfft(a.astype(np.float64), n=size)
    fb = np.fft.rfft(b.astype(np.float64), n=size)
    raw = np.fft.irfft(fa * fb, n=size)[:n]
    if limit is not None:
        raw = raw[:limit]
    return _verified_round(raw)
