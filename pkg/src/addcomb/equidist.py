"""Equidistribution engine: Bohr sets in N, exact discrepancy, classical
discrepancy bounds, window-density scans, and simultaneous approximation.

Rational frequencies are handled in exact integer arithmetic; irrational ones
use float64 with a boundary-ambiguity margin (decisions within MARGIN of an
interval endpoint are flagged and can be counted both ways).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .density import IntWindow, as_fraction

MARGIN = 1e-12


@dataclass(frozen=True)
class TorusPoint:
    """Point of T = R/Z, either exact rational p/q or a float."""

    value: float
    frac: Optional[Fraction] = None

    @classmethod
    def rational(cls, p: int, q: int) -> "TorusPoint":
        f = Fraction(p, q) % 1
        return cls(float(f), f)

    @classmethod
    def from_float(cls, x: float) -> "TorusPoint":
        return cls(x % 1.0, None)

    @property
    def is_rational(self) -> bool:
        return self.frac is not None

    @property
    def p(self) -> int:
        return self.frac.numerator

    @property
    def q(self) -> int:
        return self.frac.denominator


def _pointlike(theta) -> TorusPoint:
    if isinstance(theta, TorusPoint):
        return theta
    if isinstance(theta, Fraction):
        return TorusPoint(float(theta % 1), theta % 1)
    return TorusPoint.from_float(float(theta))


@dataclass(frozen=True)
class TorusInterval:
    """Arc of T with a left endpoint and a length; wraps past 1."""

    left: float
    length: float
    closed: bool = False

    def __post_init__(self):
        if not 0.0 <= self.length <= 1.0:
            raise ValueError("length must lie in [0, 1]")
        object.__setattr__(self, "left", self.left % 1.0)

    def contains(self, x: np.ndarray | float) -> np.ndarray | bool:
        rel = (np.asarray(x) - self.left) % 1.0
        if self.length == 1.0:
            inside = np.ones_like(rel, dtype=bool)
        elif self.closed:
            inside = rel <= self.length
        else:
            inside = rel < self.length
        return inside if isinstance(x, np.ndarray) else bool(inside)

    def ambiguous(self, x: np.ndarray | float, margin: float = MARGIN) -> np.ndarray | bool:
        rel = (np.asarray(x) - self.left) % 1.0
        near = (rel < margin) | (rel > 1 - margin) | (np.abs(rel - self.length) < margin)
        return near if isinstance(x, np.ndarray) else bool(near)

    def exact_fractions(self) -> tuple[Fraction, Fraction]:
        """Endpoints as the exact decimals/rationals the floats denote."""
        return as_fraction(self.left) % 1, as_fraction(self.length)


def torus_norm(x) -> np.ndarray | float:
    """Distance to the nearest integer."""
    arr = np.asarray(x, dtype=float)
    out = np.abs(arr - np.rint(arr))
    return out if isinstance(x, np.ndarray) else float(out)


# --- Bohr sets ---


def _rational_residue_set(theta: TorusPoint, interval: TorusInterval) -> np.ndarray:
    """Bool table over residues r mod q: is r/q in the arc (exact)."""
    q = theta.q
    left, length = interval.exact_fractions()
    table = np.zeros(q, dtype=bool)
    for r in range(q):
        rel = (Fraction(r, q) - left) % 1
        if length == 1:
            table[r] = True
        elif interval.closed:
            table[r] = rel <= length
        else:
            table[r] = rel < length
    return table


def bohr_bits(theta, interval: TorusInterval, lo: int, hi: int) -> tuple[np.ndarray, int]:
    """Membership bits of {n in [lo, hi) : n*theta mod 1 in I} plus the number
    of boundary-ambiguous decisions (always 0 on the exact rational path)."""
    theta = _pointlike(theta)
    ns = np.arange(lo, hi, dtype=np.int64)
    if theta.is_rational:
        table = _rational_residue_set(theta, interval)
        residues = (ns % theta.q) * theta.p % theta.q
        return table[residues], 0
    vals = (ns * theta.value) % 1.0
    bits = interval.contains(vals)
    ambiguous = int(np.count_nonzero(interval.ambiguous(vals)))
    return bits, ambiguous


def bohr_members(theta, interval: TorusInterval, lo: int, hi: int) -> IntWindow:
    """The Bohr set {n : n*theta mod 1 in I} truncated to [lo, hi)."""
    if lo >= hi:
        raise ValueError("need lo < hi")
    bits, _ = bohr_bits(theta, interval, lo, hi)
    return IntWindow(lo, hi, bits=bits)


# --- exact discrepancy ---


@dataclass
class DiscrepancyResult:
    n: int
    value: float
    interval: TorusInterval
    kind: str  # 'excess' or 'deficit'

    def witness_count(self, points: Sequence[float]) -> int:
        """Points inside the witness arc under its limit semantics: closed
        [l, l+len] for excess, open (l, l+len) for deficit."""
        rel = (np.asarray(points, dtype=float) % 1.0 - self.interval.left) % 1.0
        if self.kind == "excess":
            inside = rel <= self.interval.length
        else:
            inside = (rel > 0) & (rel < self.interval.length)
        return int(np.count_nonzero(inside))


def _disc_keys(points: np.ndarray):
    """Shared preprocessing: distinct sorted values, prefix counts, and the
    four key arrays whose pairwise differences enumerate every candidate arc."""
    pts = np.sort(np.asarray(points, dtype=float) % 1.0)
    n = len(pts)
    v, c = np.unique(pts, return_counts=True)
    k = len(v)
    p = np.cumsum(c)  # inclusive prefix
    vd = np.concatenate([v, v + 1.0])
    pd = np.concatenate([p, p + n])
    cd = np.concatenate([c, c])
    # Closed arcs [v_a, V_b]: count = pd[b] - (p[a] - c[a]).
    ekey_b = pd - n * vd
    ekey_a = (p - c) - n * v
    # Open arcs (v_a, V_b): count strictly inside = (pd[b] - cd[b]) - p[a].
    dkey_b = n * vd - (pd - cd)
    dkey_a = n * v - p
    return n, k, v, vd, ekey_b, ekey_a, dkey_b, dkey_a


def _window_max(values: np.ndarray, starts_lo, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Sliding max of values over windows [a + lo, a + lo + width) per a."""
    from collections import deque

    k = len(starts_lo)
    best = np.empty(k)
    arg = np.empty(k, dtype=np.int64)
    dq: deque[int] = deque()
    hi = 0
    for a in range(k):
        lo_idx = starts_lo[a]
        hi_target = lo_idx + width
        while hi < hi_target:
            while dq and values[dq[-1]] <= values[hi]:
                dq.pop()
            dq.append(hi)
            hi += 1
        while dq[0] < lo_idx:
            dq.popleft()
        best[a] = values[dq[0]]
        arg[a] = dq[0]
    return best, arg


def discrepancy_exact(points: Sequence[float]) -> DiscrepancyResult:
    """Exact sup over torus arcs of |count/N - length|, O(K log K).

    The supremum is approached on arcs whose endpoints sit at data points:
    closed arcs for count excess, open arcs for length excess.
    """
    n, k, v, vd, ekey_b, ekey_a, dkey_b, dkey_a = _disc_keys(np.asarray(points))
    starts = np.arange(k)
    ebest, earg = _window_max(ekey_b, starts, k)  # b in [a, a+k-1]
    ew = ebest - ekey_a
    ea = int(np.argmax(ew))
    eb = int(earg[ea])
    dbest, darg = _window_max(dkey_b, starts + 1, k)  # b in [a+1, a+k]
    dw = dbest - dkey_a
    da = int(np.argmax(dw))
    db = int(darg[da])
    if ew[ea] >= dw[da]:
        value = ew[ea] / n
        witness = TorusInterval(v[ea] % 1.0, min(1.0, vd[eb] - v[ea]), closed=True)
        kind = "excess"
    else:
        value = dw[da] / n
        witness = TorusInterval(v[da] % 1.0, min(1.0, vd[db] - v[da]), closed=False)
        kind = "deficit"
    return DiscrepancyResult(n, value, witness, kind)


def discrepancy_oracle(points: Sequence[float]) -> float:
    """All-pairs reference for the exact discrepancy (same key arrays)."""
    n, k, v, vd, ekey_b, ekey_a, dkey_b, dkey_a = _disc_keys(np.asarray(points))
    best = -np.inf
    for a in range(k):
        we = ekey_b[a : a + k] - ekey_a[a]
        wd = dkey_b[a + 1 : a + k + 1] - dkey_a[a]
        cand = max(float(we.max()), float(wd.max()))
        if cand > best:
            best = cand
    return best / n


# --- classical discrepancy bounds ---


def erdos_turan_bound(points: Sequence[float], n: int, c0: float) -> float:
    """c0 * (1/n + (1/m) sum_{k<=n} |sum_j e(k t_j)| / k)."""
    if n < 1:
        raise ValueError("n must be positive")
    t = np.asarray(points, dtype=float)
    m = len(t)
    ks = np.arange(1, n + 1)
    sums = np.abs(np.exp(2j * np.pi * np.outer(ks, t)).sum(axis=1))
    return c0 * (1.0 / n + (sums / ks).sum() / m)


def etk_bound(points: np.ndarray, n: int) -> float:
    """Multidimensional bound 6 d^2 3^d (1/n + weighted exponential sums over
    0 < ||h||_inf <= n with weights 1/prod max(1, |h_i|))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, d = pts.shape
    if d < 1:
        raise ValueError("need dimension >= 1")
    if (2 * n + 1) ** d > 4_000_000:
        raise ValueError("frequency box too large")
    total = 0.0
    for h in itertools.product(range(-n, n + 1), repeat=d):
        if all(hi == 0 for hi in h):
            continue
        weight = 1.0
        for hi in h:
            weight *= max(1, abs(hi))
        phases = pts @ np.asarray(h, dtype=float)
        total += abs(np.exp(2j * np.pi * phases).sum()) / weight
    return 6 * d * d * 3**d * (1.0 / n + total / m)


# --- window densities of Bohr sets ---


def window_density(theta, interval: TorusInterval, x: int, m: int) -> float:
    """|Bohr(theta, I) cap {x+1, ..., x+M}| / M."""
    if m < 1:
        raise ValueError("M must be positive")
    theta = _pointlike(theta)
    if theta.is_rational:
        q = theta.q
        table = _rational_residue_set(theta, interval)
        full, rem = divmod(m, q)
        count = int(table.sum()) * full
        if rem:
            ns = np.arange(x + 1 + full * q, x + 1 + m, dtype=np.int64)
            count += int(table[(ns % q) * theta.p % q].sum())
        return count / m
    bits, _ = bohr_bits(theta, interval, x + 1, x + m + 1)
    return int(bits.sum()) / m


def window_density_profile(theta, interval: TorusInterval, xs: Sequence[int], m: int) -> np.ndarray:
    """window_density for many window starts, via one shared prefix count."""
    xs = np.asarray(xs, dtype=np.int64)
    lo = int(xs.min()) + 1
    hi = int(xs.max()) + m + 1
    bits, _ = bohr_bits(theta, interval, lo, hi)
    prefix = np.concatenate([[0], np.cumsum(bits.astype(np.int64))])
    return (prefix[xs + m + 1 - lo] - prefix[xs + 1 - lo]) / m


def major_arc_mean_deviation(theta, interval: TorusInterval, h: int, m: int) -> float:
    """(1/H) sum_{x=1..H} |window_density(theta, I, x, M) - |I||."""
    dens = window_density_profile(theta, interval, np.arange(1, h + 1), m)
    return float(np.abs(dens - interval.length).mean())


def local_periodicity_scan(theta, q: int, interval: TorusInterval, h: int, m: int) -> float:
    """Fraction of x in [1, H] whose window {x+1..x+M} meets the Bohr set in
    a union of full residue classes mod q, using exactly ceil(q |I|) classes."""
    if m < q:
        raise ValueError("window must be at least q long")
    bits, _ = bohr_bits(theta, interval, 2, h + m + q + 2)
    bits = bits.astype(np.int8)
    off = 2  # bits[i] is membership of n = i + off
    mismatch = (bits[:-q] != bits[q:]).astype(np.int64)
    mis_prefix = np.concatenate([[0], np.cumsum(mismatch)])
    cnt_prefix = np.concatenate([[0], np.cumsum(bits.astype(np.int64))])
    target = math.ceil(q * as_fraction(interval.length))
    xs = np.arange(1, h + 1, dtype=np.int64)
    # q-periodic across the window: no mismatch for n in [x+1, x+M-q].
    a = xs + 1 - off
    b = xs + m - q - off + 1
    periodic = (mis_prefix[b] - mis_prefix[a]) == 0
    classes = cnt_prefix[xs + q - off + 1] - cnt_prefix[xs - off + 1]
    return float((periodic & (classes == target)).mean())


# --- simultaneous approximation ---


def dense_orbit_D(d: int, eps: float) -> float:
    """Auxiliary frequency-box size for the dense-orbit hypothesis constant."""
    return 2.0 * d ** (d / 2 + 2) * 3 ** (d + 2) * eps ** (-d)


def dense_orbit_constant(d: int, eps: float) -> float:
    """Hypothesis constant C0(d, eps) for the eps-dense orbit criterion."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    big_d = dense_orbit_D(d, eps)
    try:
        return d ** (d / 2 + 2) * 3 ** (d + 2) * (2 * big_d + 1) ** d / eps ** (d + 1)
    except OverflowError:
        return math.inf


def almost_period_constant(d: int, eps: float) -> float:
    """Recursive constant C(d, eps) governing the almost-period window; the
    base case is C(1, eps) = eps^-2."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if d == 1:
        return eps**-2
    c0 = dense_orbit_constant(d, eps)
    if not math.isfinite(c0):
        return math.inf
    eps_next = eps / (2 * d * c0)
    if eps_next <= 0:
        return math.inf
    try:
        prev = almost_period_constant(d - 1, eps_next)
    except OverflowError:
        return math.inf
    return max(c0, prev, 2 / eps)


def epsilon_dense_check(alphas: Sequence[float], h: int, eps: float, c0: float) -> tuple[bool, bool]:
    """(hypothesis holds for the constant c0, orbit is eps-dense).

    Hypothesis: every nonzero integer vector w with |w_i| <= c0 keeps
    ||sum w_i alpha_i|| >= c0 / H.  Density: every point of an (eps/2)-grid of
    the d-torus lies within eps (sup metric) of the orbit
    {(k alpha_1, ..., k alpha_d) : 0 <= k <= floor(eps H)}.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    alphas = np.asarray(alphas, dtype=float)
    d = len(alphas)
    w_cap = int(math.floor(c0))
    if (2 * w_cap + 1) ** d > 40_000_000:
        raise ValueError("hypothesis box too large to enumerate")
    hypothesis = True
    if w_cap >= 1:
        grids = np.meshgrid(*[np.arange(-w_cap, w_cap + 1)] * d, indexing="ij")
        ws = np.stack([g.ravel() for g in grids], axis=1)
        ws = ws[np.any(ws != 0, axis=1)]
        norms = torus_norm(ws @ alphas)
        hypothesis = bool(norms.min() >= c0 / h)
    steps = int(math.ceil(2 / eps))
    axes = [np.arange(steps) * (eps / 2) for _ in range(d)]
    grid_pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    uncovered = np.ones(len(grid_pts), dtype=bool)
    k_max = int(eps * h)
    chunk = 1 << 16
    for start in range(0, k_max + 1, chunk):
        ks = np.arange(start, min(start + chunk, k_max + 1))
        orbit = np.outer(ks, alphas) % 1.0
        diff = np.abs(grid_pts[uncovered][:, None, :] - orbit[None, :, :])
        dist = np.minimum(diff, 1.0 - diff).max(axis=2)  # sup metric per pair
        hit = (dist <= eps).any(axis=1)
        idx = np.flatnonzero(uncovered)
        uncovered[idx[hit]] = False
        if not uncovered.any():
            break
    dense = not bool(uncovered.any())
    return hypothesis, dense


def almost_period_search(alphas: Sequence[float], h: int, x: float, eps: float) -> Optional[int]:
    """First m in [(x-eps)H, (x+eps)H] with ||m alpha_i|| <= eps for all i."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    alphas = np.asarray(alphas, dtype=float)
    lo = max(1, math.ceil((x - eps) * h))
    hi = math.floor((x + eps) * h)
    if lo > hi:
        return None
    ms = np.arange(lo, hi + 1, dtype=np.int64)
    norms = torus_norm(np.outer(ms, alphas))
    ok = np.flatnonzero((norms <= eps).all(axis=1))
    if len(ok) == 0:
        return None
    m = int(ms[ok[0]])
    # Soundness re-check of the returned witness.
    assert lo <= m <= hi and float(np.max(torus_norm(m * alphas))) <= eps
    return m
