"""Degree-1/2 uniformity norms on cyclic groups and finite intervals, the
windowed intermediate-scale estimators, and constructive structured/uniform
decompositions (per-block means; spectral peeling)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class SignalWindow:
    """Complex samples f(x+1), ..., f(x+N) with the magnitude bound recorded."""

    offset: int
    values: np.ndarray
    bound: float = field(init=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=complex)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bound", float(np.max(np.abs(vals))) if len(vals) else 0.0)

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class ScaleSchedule:
    """Paired scale sequences (N_s, H_s) with optional auxiliary sequences."""

    ns: list[int]
    hs: list[int]
    ms: Optional[list[int]] = None
    ks: Optional[list[int]] = None

    def __post_init__(self):
        if len(self.ns) != len(self.hs):
            raise ValueError("N and H sequences must pair up")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValueError("N_s must be strictly increasing")
        if any(not 1 <= h <= n for h, n in zip(self.hs, self.ns)):
            raise ValueError("need 1 <= H_s <= N_s")


def _as_values(f) -> np.ndarray:
    if isinstance(f, SignalWindow):
        return f.values
    return np.asarray(f, dtype=complex)


def gowers_cyclic(f, k: int, backend: str = "fourier") -> float:
    """U^k norm over Z/Q for k in {1, 2}.

    k=1 is |mean f|.  k=2 via the spectral identity (l4 norm of the Fourier
    transform) or, with backend='direct', by the additive-quadruple sum
    reduced through the difference functions Delta_h f.
    """
    vals = _as_values(f)
    q = len(vals)
    if k == 1:
        return abs(complex(vals.mean()))
    if k != 2:
        raise ValueError("only k in {1, 2}")
    if backend == "fourier":
        hat = np.fft.fft(vals) / q
        return float(np.sum(np.abs(hat) ** 4) ** 0.25)
    if backend == "direct":
        total = 0.0
        for h1 in range(q):
            delta = vals * np.conj(np.roll(vals, -h1))
            total += abs(delta.sum()) ** 2
        return float((total / q**3) ** 0.25)
    raise ValueError(f"unknown backend {backend!r}")


def gowers_u2_triple_sum(f) -> float:
    """Literal (x, h1, h2) quadruple-average U^2; O(Q^3), for cross-checks."""
    vals = _as_values(f)
    q = len(vals)
    total = 0.0 + 0.0j
    for h1 in range(q):
        fh1 = np.roll(vals, -h1)
        for h2 in range(q):
            fh2 = np.roll(vals, -h2)
            fh12 = np.roll(vals, -(h1 + h2))
            total += np.sum(vals * np.conj(fh1) * np.conj(fh2) * fh12)
    return float(abs(total / q**3) ** 0.25)


def _embedding_modulus(n: int, k: int) -> int:
    target = (2**k) * n
    q = 1
    while q < target:
        q *= 2
    return q


def gowers_interval(f, k: int) -> float:
    """U^k seminorm of f on its window, via zero-padded embedding into Z/Nt
    with Nt the least power of two >= 2^k N, normalized by the indicator."""
    vals = _as_values(f)
    n = len(vals)
    if n == 0:
        raise ValueError("empty window")
    if k == 1:
        return abs(complex(vals.mean()))
    if k != 2:
        raise ValueError("only k in {1, 2}")
    q = _embedding_modulus(n, k)
    padded = np.zeros(q, dtype=complex)
    padded[:n] = vals
    indicator = np.zeros(q, dtype=complex)
    indicator[:n] = 1.0
    return gowers_cyclic(padded, 2) / gowers_cyclic(indicator, 2)


def dominant_frequency(f, grid_factor: int = 8, refine_iters: int = 60) -> tuple[float, float]:
    """(value, alpha) maximizing |(1/N) sum_n f(x+n) e(alpha n)| over a grid
    of spacing 1/(grid_factor*N), refined by golden-section search.

    The value is a true lower bound on the sup (it is attained by
    evaluation); the sup exceeds the unrefined grid maximum by at most
    ~pi * (grid max) * N / gridsize by the derivative bound for degree-N
    trigonometric polynomials.
    """
    vals = _as_values(f)
    n = len(vals)
    if n == 0:
        raise ValueError("empty window")
    grid = grid_factor * n
    # The transform evaluates sums against e(-j n / grid): index j <-> alpha = -j/grid.
    spectrum = np.abs(np.fft.fft(vals, grid)) / n
    j = int(np.argmax(spectrum))
    alpha0 = -j / grid
    ns = np.arange(1, n + 1)

    def amp(alpha: float) -> float:
        return abs(np.sum(vals * np.exp(2j * np.pi * alpha * ns))) / n

    a, b = alpha0 - 1.0 / grid, alpha0 + 1.0 / grid
    inv = (math.sqrt(5) - 1) / 2
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = amp(c), amp(d)
    for _ in range(refine_iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = amp(d)
        else:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = amp(c)
    candidates = [(amp(alpha0), alpha0), (fc, c), (fd, d)]
    best, best_alpha = max(candidates, key=lambda t: t[0])
    return float(best), float(best_alpha % 1.0)


def u2_interval(f, grid_factor: int = 8, refine_iters: int = 60) -> float:
    """sup_alpha |(1/N) sum_n f(x+n) e(alpha n)|, approximated from below."""
    return dominant_frequency(f, grid_factor, refine_iters)[0]


def u2_cyclic(f) -> float:
    """Largest Fourier coefficient magnitude on Z/Q."""
    vals = _as_values(f)
    return float(np.max(np.abs(np.fft.fft(vals))) / len(vals))


def u2_relation_check(f, slack: float = 1e-9) -> bool:
    """Exact chain u2 <= U2 <= sqrt(u2) for 1-bounded signals on Z/Q."""
    vals = _as_values(f)
    if np.max(np.abs(vals)) > 1 + 1e-12:
        raise ValueError("signal must be 1-bounded")
    small = u2_cyclic(vals)
    big = gowers_cyclic(vals, 2)
    return small <= big + slack and big <= math.sqrt(small) + slack


def u1_scale_estimate(f, n: int, h: int) -> float:
    """Average over window starts of |mean of f on {m+1..m+H}|, m <= N-H."""
    vals = _window_values(f, n)
    if not 1 <= h <= n:
        raise ValueError("need 1 <= H <= N")
    prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(vals)])
    sums = prefix[h : n + 1] - prefix[0 : n - h + 1]
    return float(np.mean(np.abs(sums)) / h)


def u2_scale_estimate(f, n: int, h: int) -> float:
    """Average over window starts of the interval U^2 norm at window length H."""
    vals = _window_values(f, n)
    if not 1 <= h <= n:
        raise ValueError("need 1 <= H <= N")
    q = _embedding_modulus(h, 2)
    starts = n - h + 1
    windows = np.lib.stride_tricks.sliding_window_view(vals, h)
    padded = np.zeros((starts, q), dtype=complex)
    padded[:, :h] = windows
    hats = np.abs(np.fft.fft(padded, axis=1)) / q
    norms = np.sum(hats**4, axis=1) ** 0.25
    indicator = np.zeros(q, dtype=complex)
    indicator[:h] = 1.0
    return float(np.mean(norms) / gowers_cyclic(indicator, 2))


def _window_values(f, n: int) -> np.ndarray:
    vals = _as_values(f)
    if len(vals) < n:
        raise ValueError(f"signal provides {len(vals)} samples, need {n}")
    return vals[:n]


def local_ergodicity_stat(f, n: int, h: int) -> float:
    """(1/N) sum_{m=1..N} |(1/H) sum_{j=1..H} f(m+j)|, zero beyond the window."""
    vals = _as_values(f)
    if h < 1:
        raise ValueError("H must be positive")
    ext = np.zeros(n + h, dtype=complex)
    take = min(len(vals), n + h)
    ext[:take] = vals[:take]
    prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(ext)])
    sums = prefix[h + 1 : n + h + 1] - prefix[1 : n + 1]
    return float(np.mean(np.abs(sums)) / h)


def block_decompose(f, block_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Split f into its per-block mean (blocks of block_len from the window
    start) and the remainder; the remainder has exactly zero mean per block."""
    vals = _as_values(f)
    if block_len < 1:
        raise ValueError("block length must be positive")
    n = len(vals)
    structured = np.empty(n, dtype=complex)
    for start in range(0, n, block_len):
        stop = min(start + block_len, n)
        structured[start:stop] = vals[start:stop].mean()
    return structured, vals - structured


@dataclass
class RegularityDecomposition:
    structured: np.ndarray
    pseudorandom: np.ndarray
    frequencies: list[tuple[float, complex]]
    achieved_u2: float
    success: bool
    iterations: int


def regularity_decompose(f, eps: float, d_max: Optional[int] = None) -> RegularityDecomposition:
    """Peel dominant frequencies until the residual has u2 norm <= eps.

    Returns f = structured + pseudorandom with structured in [0, 1] (clamping
    mass and the mean correction are pushed back into the pseudorandom part),
    mean(pseudorandom) ~ 0, and the achieved residual u2 reported honestly.
    """
    vals = np.asarray(f, dtype=float)
    if np.min(vals) < -1e-12 or np.max(vals) > 1 + 1e-12:
        raise ValueError("signal must take values in [0, 1]")
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = len(vals)
    if d_max is None:
        d_max = math.ceil(4 / eps**2)
    residual = vals.astype(complex)
    freqs: list[tuple[float, complex]] = []
    ns = np.arange(1, n + 1)
    iterations = 0
    while iterations < d_max:
        value, alpha = dominant_frequency(residual)
        if value <= eps * 0.9:
            break
        coeff = complex(np.sum(residual * np.exp(2j * np.pi * alpha * ns)) / n)
        wave = np.exp(-2j * np.pi * alpha * ns)
        residual = residual - coeff * wave
        freqs.append((alpha, coeff))
        # Real signals carry the conjugate peak too; remove it in the same step.
        if min(alpha % 1.0, (1 - alpha) % 1.0) > 1e-12 and abs(alpha - 0.5) > 1e-12:
            coeff2 = complex(np.sum(residual * np.exp(-2j * np.pi * alpha * ns)) / n)
            residual = residual - coeff2 * np.conj(wave)
            freqs.append(((-alpha) % 1.0, coeff2))
        iterations += 1
    structured_raw = np.real(vals - residual)
    # Clamp into [0, 1] with a mean-preserving shift so the residual mean
    # stays at machine scale; clamp mass moves into the pseudorandom part.
    target_mean = float(vals.mean())
    lo_shift, hi_shift = -2.0, 2.0
    for _ in range(80):
        mid = 0.5 * (lo_shift + hi_shift)
        if np.clip(structured_raw + mid, 0.0, 1.0).mean() < target_mean:
            lo_shift = mid
        else:
            hi_shift = mid
    structured = np.clip(structured_raw + 0.5 * (lo_shift + hi_shift), 0.0, 1.0)
    pseudorandom = vals - structured
    achieved = u2_interval(pseudorandom.astype(complex))
    return RegularityDecomposition(
        structured=structured,
        pseudorandom=pseudorandom,
        frequencies=freqs,
        achieved_u2=float(achieved),
        success=bool(achieved <= eps),
        iterations=iterations,
    )
