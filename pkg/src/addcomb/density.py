"""Density calculators for subsets of the positive integers.

IntWindow is the shared container for finite truncations of sets of natural
numbers: either an explicit bit vector or a lazy block-materialized predicate,
so generated sets and analytic sets (Bohr intervals) share one interface.
Schnirelmann quantities are computed with exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

BLOCK = 1 << 20


def as_fraction(x) -> Fraction:
    """Exact rational view of a parameter; floats are read as the decimal
    literal they print as, so 0.1 means 1/10."""
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


class IntWindow:
    """Subset of the naturals restricted to the half-open window [lo, hi)."""

    def __init__(
        self,
        lo: int,
        hi: int,
        bits: Optional[np.ndarray] = None,
        predicate: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        if lo >= hi:
            raise ValueError("window must satisfy lo < hi")
        if lo < 0:
            raise ValueError("window bounds must be nonnegative")
        if (bits is None) == (predicate is None):
            raise ValueError("exactly one of bits/predicate required")
        self.lo = int(lo)
        self.hi = int(hi)
        if bits is not None:
            if len(bits) != hi - lo:
                raise ValueError("bit vector must span the window")
            self._bits = np.ascontiguousarray(bits, dtype=bool)
            self._bits.setflags(write=False)
            self._predicate = None
            self._blocks: dict[int, np.ndarray] = {}
        else:
            self._bits = None
            self._predicate = predicate
            self._blocks = {}

    @classmethod
    def from_members(cls, lo: int, hi: int, members: Iterable[int]) -> "IntWindow":
        bits = np.zeros(hi - lo, dtype=bool)
        for m in members:
            if lo <= m < hi:
                bits[m - lo] = True
        return cls(lo, hi, bits=bits)

    @classmethod
    def from_predicate(cls, lo: int, hi: int, predicate: Callable[[np.ndarray], np.ndarray]) -> "IntWindow":
        return cls(lo, hi, predicate=predicate)

    def _block(self, which: int) -> np.ndarray:
        cached = self._blocks.get(which)
        if cached is None:
            start = self.lo + which * BLOCK
            stop = min(start + BLOCK, self.hi)
            ns = np.arange(start, stop, dtype=np.int64)
            cached = np.asarray(self._predicate(ns), dtype=bool)
            self._blocks[which] = cached
        return cached

    def bits_range(self, lo: int, hi: int) -> np.ndarray:
        """Membership bits over [lo, hi); positions outside the window are 0."""
        lo, hi = int(lo), int(hi)
        if lo >= hi:
            return np.zeros(0, dtype=bool)
        out = np.zeros(hi - lo, dtype=bool)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a >= b:
            return out
        if self._bits is not None:
            out[a - lo : b - lo] = self._bits[a - self.lo : b - self.lo]
            return out
        first = (a - self.lo) // BLOCK
        last = (b - 1 - self.lo) // BLOCK
        for which in range(first, last + 1):
            start = self.lo + which * BLOCK
            blk = self._block(which)
            s = max(a, start)
            e = min(b, start + len(blk))
            out[s - lo : e - lo] = blk[s - start : e - start]
        return out

    def count(self, lo: int, hi: int) -> int:
        """Number of members in [lo, hi)."""
        return int(self.bits_range(lo, hi).sum())

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.bits_range(self.lo, self.hi)) + self.lo

    def __contains__(self, n: int) -> bool:
        if not self.lo <= n < self.hi:
            return False
        return bool(self.bits_range(n, n + 1)[0])

    def materialize(self) -> "IntWindow":
        if self._bits is not None:
            return self
        return IntWindow(self.lo, self.hi, bits=self.bits_range(self.lo, self.hi))

    def __repr__(self) -> str:
        kind = "bits" if self._bits is not None else "lazy"
        return f"IntWindow([{self.lo}, {self.hi}), {kind})"


@dataclass
class DensityProfile:
    """Counting densities |A cap [N]| / N at increasing checkpoints."""

    checkpoints: list[int]
    values: list[float]
    running_min: float = field(init=False)
    running_max: float = field(init=False)

    def __post_init__(self):
        self.running_min = min(self.values) if self.values else float("nan")
        self.running_max = max(self.values) if self.values else float("nan")

    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.checkpoints, self.values))


def density_profile(a: IntWindow, checkpoints: list[int]) -> DensityProfile:
    """Exact counts at each checkpoint N, reported as |A cap [N]| / N."""
    if list(checkpoints) != sorted(set(checkpoints)):
        raise ValueError("checkpoints must be strictly increasing")
    values = [a.count(1, n + 1) / n for n in checkpoints]
    return DensityProfile(list(checkpoints), values)


def schnirelmann(a: IntWindow, n: int) -> Fraction:
    """min over 1 <= M <= N of |A cap [M]| / M, exactly."""
    if n < 1:
        raise ValueError("N must be positive")
    return schnirelmann_on(a, 1, n)


def schnirelmann_on(a: IntWindow, lo: int, hi: int) -> Fraction:
    """min over x in [lo, hi] of |A cap {lo..x}| / (x - lo + 1), exactly."""
    if lo > hi:
        raise ValueError("empty interval")
    counts = np.cumsum(a.bits_range(lo, hi + 1).astype(np.int64))
    lengths = np.arange(1, hi - lo + 2, dtype=np.int64)
    # Float argmin, then an exact cross-multiplied fixup among near-ties.
    ratios = counts / lengths
    best = int(np.argmin(ratios))
    for i in np.flatnonzero(ratios <= ratios[best] * (1 + 1e-12) + 1e-15):
        if counts[i] * lengths[best] < counts[best] * lengths[i]:
            best = int(i)
    return Fraction(int(counts[best]), int(lengths[best]))


def schnirelmann_union_check(a: IntWindow, b: IntWindow, n: int) -> dict:
    """Check d(A u (A+B), [N]) >= alpha + beta(1 - alpha) with exact arithmetic,
    where alpha, beta are the Schnirelmann densities of A, B on [N].

    Requires alpha > 0 (which forces 1 in A); when alpha = 0 the hypothesis
    fails and the check is skipped.
    """
    alpha = schnirelmann(a, n)
    beta = schnirelmann(b, n)
    if alpha == 0:
        return {"applicable": False, "alpha": alpha, "beta": beta, "holds": None}
    amembers = [int(x) for x in a.members() if 1 <= x <= n]
    bmembers = [int(x) for x in b.members() if 1 <= x <= n]
    covered = set(amembers)
    for x in amembers:
        for y in bmembers:
            if x + y <= n:
                covered.add(x + y)
    lhs = Fraction(len(covered), n)
    rhs = alpha + beta * (1 - alpha)
    return {"applicable": True, "alpha": alpha, "beta": beta, "lhs": lhs, "rhs": rhs, "holds": lhs >= rhs}


def find_schnirelmann_subinterval(a: IntWindow, n: int, delta: float, eps: float) -> int:
    """The largest M <= N with |A cap [M]| <= (delta - eps) M, or 0.

    Requires |A cap [N]| >= delta N and eps > 0.  The returned x satisfies
    x <= (1 - eps) N and the running ratio of A on {x+1..N} stays above
    delta - eps; both are re-verified before returning.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    dl, el = as_fraction(delta), as_fraction(eps)
    counts = np.cumsum(a.bits_range(1, n + 1).astype(np.int64))
    if Fraction(int(counts[-1])) < dl * n:
        raise ValueError("need |A| >= delta * N")
    thresh = dl - el
    thr_f = float(thresh)
    ms = np.arange(1, n + 1, dtype=np.int64)
    margin = counts - thr_f * ms
    qualifies = margin <= 0
    # Entries within float fuzz of the threshold get an exact recheck.
    fuzzy = np.flatnonzero(np.abs(margin) <= 1e-6 * ms)
    for i in fuzzy:
        qualifies[i] = Fraction(int(counts[i])) <= thresh * int(ms[i])
    hits = np.flatnonzero(qualifies)
    x = int(ms[hits[-1]]) if len(hits) else 0
    if Fraction(x) > (1 - el) * n:
        raise RuntimeError("postcondition x <= (1-eps)N failed")
    if x < n and schnirelmann_on(a, x + 1, n) <= thresh:
        raise RuntimeError("postcondition on the subinterval density failed")
    return x


def schnirelmann_union_sweep(n: int) -> dict:
    """Exhaustive check of the union inequality over all A, B subsets of [N]
    with 1 in A; exact integer arithmetic via cross-multiplication.

    Mask convention: bit i-1 set <=> i in the set.
    """
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    full = size - 1
    pc = np.zeros(size, dtype=np.int64)
    for i in range(n):
        pc += (masks >> i) & 1
    # Prefix popcounts pcm[:, M-1] = |set cap [1..M]|.
    pcm = np.zeros((size, n), dtype=np.int64)
    acc = np.zeros(size, dtype=np.int64)
    for m in range(1, n + 1):
        acc = acc + ((masks >> (m - 1)) & 1)
        pcm[:, m - 1] = acc
    # Exact Schnirelmann density per mask as (num, den).
    num = pcm[:, 0].copy()
    den = np.ones(size, dtype=np.int64)
    for m in range(2, n + 1):
        better = pcm[:, m - 1] * den < num * m
        num[better] = pcm[better, m - 1]
        den[better] = m
    a_masks = masks[(masks & 1) == 1]  # 1 in A
    tested = passed = 0
    counterexamples = []
    for a_mask in a_masks:
        a_mask = int(a_mask)
        cover = np.zeros(size, dtype=np.int64)
        for b in range(1, n + 1):
            shifted = (a_mask << b) & full
            if shifted:
                sel = ((masks >> (b - 1)) & 1) == 1
                cover[sel] |= shifted
        lhs = pc[cover | a_mask]
        pa, qa = int(num[a_mask]), int(den[a_mask])
        # lhs/N >= alpha + beta(1-alpha), cross-multiplied to integers.
        ok = lhs * qa * den >= n * (pa * den + num * qa - pa * num)
        tested += size
        passed += int(ok.sum())
        if not ok.all():
            for b_mask in masks[~ok][:5]:
                counterexamples.append({"N": n, "A_mask": a_mask, "B_mask": int(b_mask)})
    return {"tested": tested, "passed": passed, "counterexamples": counterexamples}
