"""Checkers for direct sumset theorems on Z/Q.

Each checker evaluates one classical bound on a concrete pair of sets and
reports the quantities involved.  Sweep drivers run the checkers exhaustively
(bit-mask vectorized) or on random instances and collect counterexamples; a
counterexample is always replayable from the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._bitops import popcounts, rotation_tables, sumset_masks
from .zq import ZqSet, divisors, meets_all_cosets, sumset


@dataclass
class DirectReport:
    """Outcome of one direct-theorem check."""

    theorem: str
    q: int
    size_a: int
    size_b: int
    size_sum: int
    bound: float
    satisfied: Optional[bool]
    hypothesis_ok: bool = True
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "Q": self.q,
            "|A|": self.size_a,
            "|B|": self.size_b,
            "|A+B|": self.size_sum,
            "bound": self.bound,
            "satisfied": self.satisfied,
            "hypothesis_ok": self.hypothesis_ok,
            "witness": self.witness,
        }


@dataclass
class SweepResult:
    tested: int
    passed: int
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.tested

    def to_dict(self) -> dict:
        return {
            "tested": self.tested,
            "passed": self.passed,
            "counterexamples": self.counterexamples,
        }


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def cauchy_davenport_check(p: int, a: ZqSet, b: ZqSet) -> DirectReport:
    """|A+B| >= min(p, |A|+|B|-1) for nonempty A, B in Z/p."""
    _require_prime(p)
    if a.q != p or b.q != p:
        raise ValueError("sets must live in Z/p")
    if len(a) == 0 or len(b) == 0:
        raise ValueError("sets must be nonempty")
    s = sumset(a, b)
    bound = min(p, len(a) + len(b) - 1)
    return DirectReport(
        theorem="cauchy-davenport",
        q=p,
        size_a=len(a),
        size_b=len(b),
        size_sum=len(s),
        bound=bound,
        satisfied=len(s) >= bound,
    )


def ap_difference_classes(s: ZqSet) -> set[int]:
    """Difference classes d (identified with p-d) for which S is an AP.

    S is an AP with difference d iff S = {a, a+d, ..., a+(k-1)d} for some a.
    Tries every d; O(p * |S|) which is fine at sweep scale.
    """
    p = s.q
    els = s.elements()
    k = len(els)
    out: set[int] = set()
    if k == 0:
        return out
    if k == p:
        return {min(d, p - d) for d in range(1, p)}
    member = s.bits
    for d in range(1, p):
        # Contiguity under step d: S is a d-AP iff exactly one element of S
        # has no predecessor (element - d) inside S.
        starts = sum(1 for e in els if not member[(e - d) % p])
        if starts == 1 or (k == 1):
            out.add(min(d, p - d))
    return out


def vosper_classify(p: int, a: ZqSet, b: ZqSet) -> DirectReport:
    """Equality case of the Cauchy-Davenport bound vs. common-step AP structure.

    In scope when |A|, |B| > 1 and |A| + |B| < p; there the two predicates
    (extremal sumset size, shared AP step) must coincide.
    """
    _require_prime(p)
    s = sumset(a, b)
    in_scope = len(a) > 1 and len(b) > 1 and len(a) + len(b) < p
    extremal = len(s) == len(a) + len(b) - 1
    common = ap_difference_classes(a) & ap_difference_classes(b) if in_scope else set()
    is_ap_pair = bool(common)
    return DirectReport(
        theorem="vosper",
        q=p,
        size_a=len(a),
        size_b=len(b),
        size_sum=len(s),
        bound=len(a) + len(b) - 1,
        satisfied=(extremal == is_ap_pair) if in_scope else None,
        hypothesis_ok=in_scope,
        witness={"extremal": extremal, "ap_pair": is_ap_pair, "common_steps": sorted(common)},
    )


def kneser_cyclic_check(q: int, a: ZqSet, b: ZqSet, eps: float) -> DirectReport:
    """Either |A+B| > |A| + |B| - eps*Q or A+B = Z/Q, when B meets every
    coset of every subgroup of index <= ceil(1/eps)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if len(a) == 0 or len(b) == 0:
        raise ValueError("sets must be nonempty")
    max_index = math.ceil(1.0 / eps)
    hyp = meets_all_cosets(b, max_index)
    s = sumset(a, b)
    satisfied = None
    if hyp:
        satisfied = (len(s) > len(a) + len(b) - eps * q) or (len(s) == q)
    return DirectReport(
        theorem="kneser-cyclic",
        q=q,
        size_a=len(a),
        size_b=len(b),
        size_sum=len(s),
        bound=len(a) + len(b) - eps * q,
        satisfied=satisfied,
        hypothesis_ok=hyp,
        witness={"max_index": max_index, "eps": eps},
    )


# --- exhaustive sweeps (mask-vectorized) ---


def cauchy_davenport_sweep(p: int, slack: int = 0) -> SweepResult:
    """Every nonempty pair (A, B) in Z/p against the bound; a positive slack
    tightens the bound to surface the extremal pairs."""
    _require_prime(p)
    rot = rotation_tables(p)
    sizes = popcounts(p)
    all_b = np.arange(1, 1 << p, dtype=np.int64)
    b_sizes = sizes[all_b]
    tested = passed = 0
    counterexamples = []
    for a_mask in range(1, 1 << p):
        ssize = sizes[sumset_masks(a_mask, all_b, rot)]
        bound = np.minimum(p, sizes[a_mask] + b_sizes - 1)
        ok = ssize >= bound + slack
        tested += len(all_b)
        passed += int(ok.sum())
        if not ok.all():
            for b_mask in all_b[~ok][:5]:
                counterexamples.append({"p": p, "A": _mask_elements(a_mask), "B": _mask_elements(int(b_mask))})
    return SweepResult(tested, passed, counterexamples)


def vosper_sweep(p: int) -> SweepResult:
    """Biconditional (extremal <=> common-step APs) over all in-scope pairs."""
    _require_prime(p)
    rot = rotation_tables(p)
    sizes = popcounts(p)
    step_masks = _ap_step_masks(p)
    masks = np.arange(1 << p, dtype=np.int64)
    in_scope_b = masks[(sizes >= 2)]
    tested = passed = 0
    counterexamples = []
    for a_mask in range(1, 1 << p):
        ka = sizes[a_mask]
        if ka < 2:
            continue
        bs = in_scope_b[ka + sizes[in_scope_b] < p]
        if len(bs) == 0:
            continue
        ssize = sizes[sumset_masks(a_mask, bs, rot)]
        extremal = ssize == ka + sizes[bs] - 1
        ap_pair = (step_masks[a_mask] & step_masks[bs]) != 0
        ok = extremal == ap_pair
        tested += len(bs)
        passed += int(ok.sum())
        if not ok.all():
            for b_mask in bs[~ok][:5]:
                counterexamples.append({"p": p, "A": _mask_elements(a_mask), "B": _mask_elements(int(b_mask))})
    return SweepResult(tested, passed, counterexamples)


def _ap_step_masks(p: int) -> np.ndarray:
    """For each subset mask, the bitmask of steps d (d ~ p-d) making it an AP."""
    n = 1 << p
    out = np.zeros(n, dtype=np.int64)
    for d in range(1, p // 2 + 1):
        bit = 1 << (d - 1)
        for start in range(p):
            mask = 0
            x = start
            for _ in range(p):
                mask |= 1 << x
                out[mask] |= bit
                x = (x + d) % p
    return out


def kneser_sweep(q: int, eps: float, slack: int = 0) -> SweepResult:
    """All nonempty pairs whose B satisfies the coset hypothesis."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    max_index = math.ceil(1.0 / eps)
    rot = rotation_tables(q)
    sizes = popcounts(q)
    hyp = _coset_hypothesis_masks(q, max_index)
    all_b = np.arange(1, 1 << q, dtype=np.int64)
    all_b = all_b[hyp[all_b]]
    tested = passed = 0
    counterexamples = []
    for a_mask in range(1, 1 << q):
        smasks = sumset_masks(a_mask, all_b, rot)
        ssize = sizes[smasks]
        ok = (ssize > sizes[a_mask] + sizes[all_b] - eps * q + slack) | (ssize == q)
        tested += len(all_b)
        passed += int(ok.sum())
        if not ok.all():
            for b_mask in all_b[~ok][:5]:
                counterexamples.append(
                    {"Q": q, "eps": eps, "A": _mask_elements(a_mask), "B": _mask_elements(int(b_mask))}
                )
    return SweepResult(tested, passed, counterexamples)


def _coset_hypothesis_masks(q: int, max_index: int) -> np.ndarray:
    """Boolean table over masks: does the set meet every coset of every
    subgroup of index <= max_index?"""
    n = 1 << q
    ok = np.ones(n, dtype=bool)
    for d in divisors(q):
        if d > max_index:
            continue
        residue_mask = np.zeros(n, dtype=np.int64)
        for r in range(d):
            cls = 0
            for x in range(r, q, d):
                cls |= 1 << x
            hits = (np.arange(n, dtype=np.int64) & cls) != 0
            residue_mask += hits
        ok &= residue_mask == d
    return ok


def kneser_identity_sweep(q: int) -> SweepResult:
    """Whenever |A+B| < |A| + |B|, the sumset is a union of cosets of its
    stabilizer H and |A+B| = |A+H| + |B+H| - |H|.  Exhaustive over all
    nonempty pairs in Z/q."""
    rot = rotation_tables(q)
    sizes = popcounts(q)
    divs = divisors(q)
    masks = np.arange(1 << q, dtype=np.int64)
    # Smallest divisor-period of each mask; that divisor generates the stabilizer.
    stab = np.full(1 << q, q, dtype=np.int64)
    for d in reversed(divs):
        stab[rot[d % q][masks] == masks] = d
    # Coset saturation tables, one per divisor.
    sat = {}
    for d in divs:
        s = masks.copy()
        for k in range(d, q, d):
            s |= rot[k][masks]
        sat[d] = s
    all_b = np.arange(1, 1 << q, dtype=np.int64)
    tested = passed = 0
    counterexamples = []
    for a_mask in range(1, 1 << q):
        smask = sumset_masks(a_mask, all_b, rot)
        strict = sizes[smask] < sizes[a_mask] + sizes[all_b]
        tested += len(all_b)
        passed += int((~strict).sum())
        idx = np.flatnonzero(strict)
        if len(idx) == 0:
            continue
        sm = smask[idx]
        bm = all_b[idx]
        ok = np.zeros(len(idx), dtype=bool)
        for d in divs:
            sel = stab[sm] == d
            if not sel.any():
                continue
            lhs = sizes[sm[sel]]
            rhs = sizes[sat[d][a_mask]] + sizes[sat[d][bm[sel]]] - q // d
            ok[sel] = lhs == rhs
        passed += int(ok.sum())
        if not ok.all():
            for b_mask in bm[~ok][:5]:
                counterexamples.append({"Q": q, "A": _mask_elements(a_mask), "B": _mask_elements(int(b_mask))})
    return SweepResult(tested, passed, counterexamples)


def kneser_random_sweep(q: int, trials: int, eps: float, seed: int = 0) -> SweepResult:
    """Random pairs with hypothesis-satisfying B against the Kneser bound."""
    rng = np.random.default_rng(seed)
    max_index = math.ceil(1.0 / eps)
    tested = passed = 0
    counterexamples = []
    while tested < trials:
        da = rng.uniform(0.05, 0.95)
        db = rng.uniform(0.05, 0.95)
        a = ZqSet(q, rng.random(q) < da)
        b = ZqSet(q, rng.random(q) < db)
        if len(a) == 0 or len(b) == 0 or not meets_all_cosets(b, max_index):
            continue
        s = sumset(a, b)
        ok = (len(s) > len(a) + len(b) - eps * q) or (len(s) == q)
        tested += 1
        passed += int(ok)
        if not ok:
            counterexamples.append({"Q": q, "eps": eps, "A": a.elements(), "B": b.elements()})
    return SweepResult(tested, passed, counterexamples)


def _mask_elements(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out
