"""Generators for the explicit extremal example sets: the coin-flip even set,
periodic-block unions with interval-translate partners, the two-scale pair
whose sumset density oscillates between scales, and lifted parallel Bohr
pairs.  All generators are deterministic given (params, seed, bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._convolve import linear_convolve_exact
from .density import IntWindow
from .equidist import TorusInterval, TorusPoint, bohr_bits


def coinflip_even_set(seed: int, bound: int) -> IntWindow:
    """{2n : nth flip is heads} truncated to [1, bound]."""
    if bound < 2:
        raise ValueError("bound must be at least 2")
    rng = np.random.default_rng(seed)
    half = bound // 2
    heads = rng.random(half) < 0.5
    bits = np.zeros(bound, dtype=bool)
    bits[2 * np.flatnonzero(heads) + 1] = True  # position index i holds n = i+1
    return IntWindow(1, bound + 1, bits=bits)


def coinflip_set(seed: int, bound: int, p: float, multiples_of: int = 1) -> IntWindow:
    """Each n (restricted to the given residue-0 class) kept with probability p."""
    rng = np.random.default_rng(seed)
    ns = np.arange(1, bound + 1)
    bits = (rng.random(bound) < p) & (ns % multiples_of == 0)
    return IntWindow(1, bound + 1, bits=bits)


def ctmn_block(t: int, m: int, n: int, alpha: float) -> IntWindow:
    """(tZ + {1..floor(alpha t)}) cap [m, n)."""
    if t < 1 or m >= n:
        raise ValueError("need t >= 1 and m < n")
    top = math.floor(alpha * t)
    lo = max(m, 1)
    ns = np.arange(lo, n)
    residues = ns % t
    bits = (residues >= 1) & (residues <= top)
    return IntWindow(lo, n, bits=bits)


@dataclass
class CtmnParams:
    """Stage data for the union-of-periodic-blocks pair: A is a union of
    residue-run blocks C(t_i, K_i, K_{i+1}); B a union of translated intervals
    b_i + [b_{i-2}] so that B meets every residue class at finite scale."""

    alpha: float
    ts: list[int]
    ks: list[int]  # one longer than ts: stage i spans [K_i, K_{i+1})
    bs: list[int]
    r1: float = 4.0
    r2: float = 4.0
    r3: float = 4.0

    def violations(self) -> list[str]:
        out = []
        if not 0 < self.alpha < 1:
            out.append("alpha must lie in (0,1)")
        if len(self.ks) != len(self.ts) + 1:
            out.append("need one more K than t")
        if len(self.bs) != len(self.ts):
            out.append("need one b per stage")
        for i, (t, b) in enumerate(zip(self.ts, self.bs), start=1):
            if b % t != 0:
                out.append(f"b_{i}={b} is not a multiple of t_{i}={t}")
        for i, t in enumerate(self.ts, start=1):
            if t / self.ks[i - 1] > 1 / self.r1:
                out.append(f"t_{i}/K_{i} exceeds 1/r1")
        for i, b in enumerate(self.bs, start=1):
            if i * i * self.ks[i - 1] / b > 1 / self.r2:
                out.append(f"i^2 K_i/b_i exceeds 1/r2 at stage {i}")
        for i in range(1, len(self.ts)):
            if self.bs[i - 1] / self.ts[i] > 1 / self.r3:
                out.append(f"b_{i}/t_{i+1} exceeds 1/r3")
        return out


def ctmn_preset(alpha: float, r: float, stages: int, t1: int = 4) -> CtmnParams:
    """Smallest sequences meeting every ratio bound with knob r."""
    ts, ks, bs = [], [], []
    t = t1
    for i in range(1, stages + 1):
        ts.append(t)
        k = math.ceil(r * t)
        ks.append(k)
        b = t * math.ceil(r * i * i * k / t)
        bs.append(b)
        t = math.ceil(r * b)
    ks.append(math.ceil(r * t))  # K_{stages+1} closes the last block
    return CtmnParams(alpha=alpha, ts=ts, ks=ks, bs=bs, r1=r, r2=r, r3=r)


def build_ctmn_pair(params: CtmnParams, bound: int) -> tuple[IntWindow, IntWindow]:
    """Materialize the pair on [1, bound]; raises on validator failure."""
    problems = params.violations()
    if problems:
        raise ValueError("; ".join(problems))
    a_bits = np.zeros(bound, dtype=bool)
    ns = np.arange(1, bound + 1)
    for i, t in enumerate(params.ts):
        lo, hi = params.ks[i], min(params.ks[i + 1], bound + 1)
        if lo >= hi:
            continue
        top = math.floor(params.alpha * t)
        seg = slice(lo - 1, hi - 1)
        res = ns[seg] % t
        a_bits[seg] = (res >= 1) & (res <= top)
    b_bits = np.zeros(bound, dtype=bool)
    lengths = [1, 1] + params.bs[:-2]  # stage i >= 3 carries an interval of b_{i-2}
    for b, ln in zip(params.bs, lengths):
        lo, hi = b + 1, min(b + ln, bound) + 1
        if lo <= bound:
            b_bits[lo - 1 : hi - 1] = True
    return IntWindow(1, bound + 1, bits=a_bits), IntWindow(1, bound + 1, bits=b_bits)


@dataclass
class TwoScaleParams:
    """Schedules for the pair whose sumset density is alpha+beta along N_s but
    saturates along M_s; beta = 1 - 1/h."""

    h: int
    alpha: float
    ns: list[int]
    ms: list[int]
    ks: list[int]
    ts: list[int]
    seed_a: int = 101
    seed_b: int = 202
    r_prev: float = 2.0  # N_{s-1}/M_s bound is 1/r_prev
    r_mt: float = 25.0
    r_tk: float = 2.0
    r_kn: float = 10.0

    @property
    def beta(self) -> float:
        return 1 - 1 / self.h

    def violations(self) -> list[str]:
        out = []
        if self.h < 2:
            out.append("h must be at least 2")
        if not 0 < self.alpha < 1 / self.h:
            out.append("alpha must lie in (0, 1/h)")
        if not len(self.ns) == len(self.ms) == len(self.ks) == len(self.ts):
            out.append("schedules must have equal length")
        prev_n = 1
        for s, (n, m, k, t) in enumerate(zip(self.ns, self.ms, self.ks, self.ts), start=1):
            if not prev_n < m < t < k < n:
                out.append(f"need N_{s-1} < M_s < t_s < K_s < N_s at stage {s}")
            if prev_n / m > 1 / self.r_prev:
                out.append(f"N_{s-1}/M_s exceeds 1/{self.r_prev}")
            if m / t > 1 / self.r_mt:
                out.append(f"M_s/t_s exceeds 1/{self.r_mt} at stage {s}")
            if t / k > 1 / self.r_tk:
                out.append(f"t_s/K_s exceeds 1/{self.r_tk} at stage {s}")
            if k / n > 1 / self.r_kn:
                out.append(f"K_s/N_s exceeds 1/{self.r_kn} at stage {s}")
            prev_n = n
        return out


def two_scale_preset(h: int = 2, alpha: float = 0.3) -> TwoScaleParams:
    """Desk-scale two-stage schedule; t_s are multiples of 10 so the periodic
    runs carry density alpha*h exactly when alpha*h has one decimal digit."""
    return TwoScaleParams(
        h=h,
        alpha=alpha,
        ms=[6, 25_000],
        ts=[150, 1_000_000],
        ks=[300, 2_000_000],
        ns=[3_000, 30_000_000],
    )


def build_two_scale_pair(params: TwoScaleParams, bound: Optional[int] = None) -> tuple[IntWindow, IntWindow]:
    """Materialize A = union of reference pieces and periodic runs inside hN,
    B = union of reference pieces and the full complement of hN per stage."""
    problems = params.violations()
    if problems:
        raise ValueError("; ".join(problems))
    h, alpha = params.h, params.alpha
    bound = params.ns[-1] if bound is None else bound
    ns_axis = np.arange(1, bound + 1)
    astar = np.random.default_rng(params.seed_a).random(bound) < alpha * h
    astar &= ns_axis % h == 0
    bstar = np.random.default_rng(params.seed_b).random(bound) < params.beta
    a_bits = np.zeros(bound, dtype=bool)
    b_bits = np.zeros(bound, dtype=bool)
    prev_n = 1
    for n, m, k, t in zip(params.ns, params.ms, params.ks, params.ts):
        lo, hi = prev_n + 1, min(k, bound) + 1  # A piece: A* on (N_{s-1}, K_s]
        if lo <= bound:
            a_bits[lo - 1 : hi - 1] = astar[lo - 1 : hi - 1]
        lo, hi = max(k + 1, 1), min(n, bound) + 1  # periodic run piece on (K_s, N_s]
        if lo <= bound:
            seg = slice(lo - 1, hi - 1)
            res = ns_axis[seg] % t
            top = math.floor(alpha * h * t)
            a_bits[seg] = (res >= 1) & (res <= top) & (ns_axis[seg] % h == 0)
        lo, hi = prev_n + 1, min(m, bound) + 1  # B piece: B* on (N_{s-1}, M_s]
        if lo <= bound:
            b_bits[lo - 1 : hi - 1] = bstar[lo - 1 : hi - 1]
        lo, hi = m + 1, min(n, bound) + 1  # complement piece on (M_s, N_s]
        if lo <= bound:
            seg = slice(lo - 1, hi - 1)
            b_bits[seg] = ns_axis[seg] % h != 0
        prev_n = n
    return IntWindow(1, bound + 1, bits=a_bits), IntWindow(1, bound + 1, bits=b_bits)


def lifted_bohr_pair(
    h: int,
    theta,
    interval_i: TorusInterval,
    interval_j: TorusInterval,
    a0: int,
    b0: int,
    bound: int,
) -> tuple[IntWindow, IntWindow]:
    """A = {n in hN : n theta in I} - a0 and B = ({n in hN : n theta in J}
    u (N \\ hN)) - b0, truncated to [1, bound]."""
    if h < 1:
        raise ValueError("h must be positive")
    if not (0 <= a0 < h and 0 <= b0 < h):
        raise ValueError("shifts must lie in [0, h)")
    hi = bound + h + 1
    ns = np.arange(1, hi)
    in_h = ns % h == 0
    bits_i, _ = bohr_bits(theta, interval_i, 1, hi)
    bits_j, _ = bohr_bits(theta, interval_j, 1, hi)
    a_full = in_h & bits_i
    b_full = (in_h & bits_j) | ~in_h
    a_bits = np.zeros(bound, dtype=bool)
    b_bits = np.zeros(bound, dtype=bool)
    # member n of the unshifted set contributes n - shift to the output
    for shift, src, dst in ((a0, a_full, a_bits), (b0, b_full, b_bits)):
        members = ns[src] - shift
        members = members[(members >= 1) & (members <= bound)]
        dst[members - 1] = True
    return IntWindow(1, bound + 1, bits=a_bits), IntWindow(1, bound + 1, bits=b_bits)


# --- sumsets of integer windows ---


def nat_sumset_counts(a: IntWindow, b: IntWindow, limit: int) -> np.ndarray:
    """Representation counts of 2..limit as x + y, x in A, y in B (exact)."""
    abits = a.bits_range(1, limit + 1).astype(np.int64)
    bbits = b.bits_range(1, limit + 1).astype(np.int64)
    conv = linear_convolve_exact(abits, bbits, limit=limit + 1)
    counts = np.zeros(limit + 1, dtype=np.int64)
    # conv index i holds the count for the sum i + 2
    top = min(limit + 1, len(conv) + 2)
    counts[2:top] = conv[: top - 2]
    return counts


def nat_sumset(a: IntWindow, b: IntWindow, limit: int) -> IntWindow:
    """A + B truncated to [1, limit]."""
    counts = nat_sumset_counts(a, b, limit)
    return IntWindow(1, limit + 1, bits=counts[1:] > 0)


def sumset_density_at(a: IntWindow, b: IntWindow, checkpoints: list[int]) -> list[float]:
    """|(A+B) cap [N]| / N at each checkpoint, one exact convolution."""
    limit = max(checkpoints)
    s = nat_sumset(a, b, limit)
    return [s.count(1, n + 1) / n for n in checkpoints]
