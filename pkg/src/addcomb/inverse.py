"""Certificate verification and heuristic detection for the cyclic inverse
theorems: the three-case stability classification, the four-case structure
theorem, and popular-sumset cover certificates.

Verification is exact set arithmetic; detection (the search for a verifying
certificate) is heuristic and never returns a certificate that fails its own
verifier.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .zq import Subgroup, ZqSet, all_subgroups, coset_saturation, popular_sumset, sumset


class CertificateError(ValueError):
    """Certificate is structurally malformed (not merely failing)."""


# --- homomorphisms H -> Z/N for H = d Z/Q ---


def compress_to_subgroup(s: ZqSet, h: Subgroup) -> ZqSet:
    """View S cap H inside H identified with Z/|H| (divide indices by d)."""
    return ZqSet(h.order, s.bits[:: h.d])


def hom_values(h: Subgroup, t: int, n: int) -> None:
    if h.order % n != 0:
        raise CertificateError(f"Z/{n} is not a quotient of a subgroup of order {h.order}")
    if n > 1 and math.gcd(t, n) != 1:
        raise CertificateError(f"multiplier {t} is not a unit mod {n}")


def hom_preimage(h: Subgroup, t: int, n: int, arc: tuple[int, int]) -> ZqSet:
    """Preimage inside H of the arc {start, ..., start+len-1} of Z/N under
    the surjective map d*j -> t*j mod N."""
    hom_values(h, t, n)
    start, length = arc
    js = np.arange(h.order, dtype=np.int64)
    residues = (js * t) % n
    rel = (residues - start) % n
    inside = rel < length if length < n else np.ones(h.order, dtype=bool)
    bits = np.zeros(h.q, dtype=bool)
    bits[js[inside] * h.d] = True
    return ZqSet(h.q, bits)


def _arc_members(n: int, arc: tuple[int, int]) -> np.ndarray:
    start, length = arc
    return (np.arange(start, start + length) % n).astype(np.int64)


# --- certificates ---


@dataclass
class StructureCertificate:
    """Data backing one case of the four-case structure theorem."""

    case: str  # 'i' | 'ii' | 'iii' | 'iv'
    q: int
    eps: float
    eta: float
    k: int
    index_cap: int
    subgroup: Optional[Subgroup] = None
    a0: Optional[int] = None
    b0: Optional[int] = None
    part_a0: Optional[ZqSet] = None
    part_b0: Optional[ZqSet] = None
    part_b1: Optional[ZqSet] = None
    n: Optional[int] = None
    t: Optional[int] = None
    arc_i: Optional[tuple[int, int]] = None
    arc_j: Optional[tuple[int, int]] = None
    delta: Optional[float] = None

    def to_json(self) -> str:
        def setlist(s):
            return None if s is None else s.elements()

        return json.dumps(
            {
                "case": self.case,
                "Q": self.q,
                "eps": self.eps,
                "eta": self.eta,
                "k": self.k,
                "D": self.index_cap,
                "subgroup_d": None if self.subgroup is None else self.subgroup.d,
                "a0": self.a0,
                "b0": self.b0,
                "A0": setlist(self.part_a0),
                "B0": setlist(self.part_b0),
                "B1": setlist(self.part_b1),
                "N": self.n,
                "t": self.t,
                "I": self.arc_i,
                "J": self.arc_j,
                "delta": self.delta,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "StructureCertificate":
        o = json.loads(text)
        q = int(o["Q"])

        def zset(key):
            return None if o.get(key) is None else ZqSet.from_elements(q, o[key])

        return cls(
            case=o["case"],
            q=q,
            eps=o["eps"],
            eta=o["eta"],
            k=o["k"],
            index_cap=o["D"],
            subgroup=None if o.get("subgroup_d") is None else Subgroup(q, o["subgroup_d"]),
            a0=o.get("a0"),
            b0=o.get("b0"),
            part_a0=zset("A0"),
            part_b0=zset("B0"),
            part_b1=zset("B1"),
            n=o.get("N"),
            t=o.get("t"),
            arc_i=None if o.get("I") is None else tuple(o["I"]),
            arc_j=None if o.get("J") is None else tuple(o["J"]),
            delta=o.get("delta"),
        )


@dataclass
class StructureReport:
    matched_case: str  # 'i' | 'ii' | 'iii' | 'iv' | 'none'
    certificate: Optional[StructureCertificate]
    error_masses: dict = field(default_factory=dict)
    frequency: Optional[tuple[int, int]] = None  # (t, N)

    def to_dict(self) -> dict:
        return {
            "case": self.matched_case,
            "certificate": None if self.certificate is None else json.loads(self.certificate.to_json()),
            "error_masses": self.error_masses,
            "frequency": self.frequency,
        }


def _check_decomposition(a: ZqSet, b: ZqSet, cert: StructureCertificate) -> bool:
    h = cert.subgroup
    hset = h.as_set()
    a0, b0p, b1 = cert.part_a0, cert.part_b0, cert.part_b1
    if a0 is None or b0p is None or b1 is None or cert.a0 is None or cert.b0 is None:
        raise CertificateError("decomposition parts missing")
    if a0.q != cert.q or b0p.q != cert.q or b1.q != cert.q:
        raise CertificateError("part modulus mismatch")
    if cert.a0 not in a or cert.b0 not in b:
        return False
    if a != a0.shift(cert.a0):
        return False
    if b != b0p.union(b1).shift(cert.b0):
        return False
    if not a0.issubset(hset) or not b0p.issubset(hset):
        return False
    if len(b1.intersect(hset)) != 0:
        return False
    return True


def verify_case_i(a: ZqSet, b: ZqSet, cert: StructureCertificate) -> bool:
    """|A+B| at least (|A|/Q + |B|/Q + delta) Q."""
    if cert.case != "i" or cert.delta is None:
        raise CertificateError("certificate is not case i")
    q = cert.q
    return len(sumset(a, b)) >= (len(a) / q + len(b) / q + cert.delta) * q


def verify_case_ii(a: ZqSet, b: ZqSet, cert: StructureCertificate) -> bool:
    """|A+B| at least (1 - eps) Q."""
    if cert.case != "ii":
        raise CertificateError("certificate is not case ii")
    return len(sumset(a, b)) >= (1 - cert.eps) * cert.q


def verify_case_iii(a: ZqSet, b: ZqSet, cert: StructureCertificate) -> bool:
    """A = A0+a0 and B = (B0 u B1)+b0 with A0, B0 inside H projecting into
    parallel arcs of Z/N (small excess) and B1 nearly all of the complement."""
    if cert.case != "iii":
        raise CertificateError("certificate is not case iii")
    h = cert.subgroup
    if h is None or h.q != cert.q:
        raise CertificateError("subgroup missing or wrong modulus")
    if h.index > cert.index_cap:
        raise CertificateError(f"subgroup index {h.index} exceeds cap {cert.index_cap}")
    if cert.n is None or cert.t is None or cert.arc_i is None or cert.arc_j is None:
        raise CertificateError("homomorphism data missing")
    if cert.n <= cert.k:
        raise CertificateError(f"need N > k, got N={cert.n}, k={cert.k}")
    hom_values(h, cert.t, cert.n)
    if not _check_decomposition(a, b, cert):
        return False
    q, eps = cert.q, cert.eps
    if not len(cert.part_b1) > q - h.order - eps * h.order:
        return False
    pre_i = hom_preimage(h, cert.t, cert.n, cert.arc_i)
    pre_j = hom_preimage(h, cert.t, cert.n, cert.arc_j)
    if not cert.part_a0.issubset(pre_i) or not cert.part_b0.issubset(pre_j):
        return False
    if len(pre_i.difference(cert.part_a0)) >= eps * q:
        return False
    if len(pre_j.difference(cert.part_b0)) >= eps * q:
        return False
    return True


def verify_case_iv(a: ZqSet, b: ZqSet, cert: StructureCertificate) -> bool:
    """A = A0+a0, B = (B0 u B1)+b0 with B1 nearly all of the complement of H
    and B0 small inside H."""
    if cert.case != "iv":
        raise CertificateError("certificate is not case iv")
    h = cert.subgroup
    if h is None or h.q != cert.q:
        raise CertificateError("subgroup missing or wrong modulus")
    if h.index > cert.index_cap:
        raise CertificateError(f"subgroup index {h.index} exceeds cap {cert.index_cap}")
    if not _check_decomposition(a, b, cert):
        return False
    q, eta = cert.q, cert.eta
    if not len(cert.part_b1) > q - h.order - eta * h.order:
        return False
    if not len(cert.part_b0) < eta * h.order:
        return False
    return True


# --- stability cases ---


@dataclass
class StabilityData:
    """Witness data for one case of the three-case stability theorem."""

    subgroup: Subgroup
    eps: float
    a0: int = 0
    b0: int = 0
    part_a0: Optional[ZqSet] = None
    part_a1: Optional[ZqSet] = None
    part_b0: Optional[ZqSet] = None
    part_b1: Optional[ZqSet] = None
    x: Optional[int] = None
    y: Optional[int] = None
    n: Optional[int] = None
    t: Optional[int] = None
    arc_i: Optional[tuple[int, int]] = None
    arc_j: Optional[tuple[int, int]] = None
    k: int = 1


def _periodic_defect(s: ZqSet, h: Subgroup) -> int:
    return len(coset_saturation(s, h).difference(s))


def verify_stability_case(a: ZqSet, b: ZqSet, case: str, data: StabilityData) -> bool:
    """Verbatim condition check for stability case I, II, or III."""
    h = data.subgroup
    eps = data.eps
    s = sumset(a, b)
    q = a.q
    if case == "I":
        if not _periodic_defect(s, h) < eps * h.order:
            return False
        sh = coset_saturation(s, h)
        return len(sh) <= len(coset_saturation(a, h)) + len(coset_saturation(b, h))
    if case == "II":
        if _periodic_defect(s, h) < eps * h.order:
            return False  # case II demands failure of eps-periodicity
        parts = (data.part_a0, data.part_a1, data.part_b0, data.part_b1)
        if any(p is None for p in parts):
            raise CertificateError("case II needs all four parts")
        pa0, pa1, pb0, pb1 = parts
        hset = h.as_set()
        if a != pa0.union(pa1).shift(data.a0) or len(pa0.intersect(pa1)) != 0:
            return False
        if b != pb0.union(pb1).shift(data.b0) or len(pb0.intersect(pb1)) != 0:
            return False
        if data.a0 not in a or data.b0 not in b:
            return False
        if len(pa0) == 0 or len(pb0) == 0:  # (II.a)
            return False
        if not pa0.issubset(hset) or not pb0.issubset(hset):  # (II.b)
            return False
        if not len(sumset(pa0, pb0)) <= len(pa0) + len(pb0) + eps * h.order:  # (II.c)
            return False
        if len(pa1) == 0 and len(pb1) == 0:  # (II.d)
            return False
        if len(coset_saturation(pa1, h).intersect(pa0)) != 0 or len(
            coset_saturation(pb1, h).intersect(pb0)
        ) != 0:  # (II.e)
            return False
        if _periodic_defect(pa1, h) > eps * h.order or _periodic_defect(pb1, h) > eps * h.order:  # (II.f)
            return False
        return True
    if case == "III":
        if data.n is None or data.t is None or data.arc_i is None or data.arc_j is None:
            raise CertificateError("case III needs homomorphism data")
        if data.n <= data.k:
            raise CertificateError(f"need N > k, got N={data.n}")
        if data.x is None or data.y is None:
            raise CertificateError("case III needs the shifts x, y")
        if not len(s) < (1 - eps) * h.order:
            return False
        aprime = hom_preimage(h, data.t, data.n, data.arc_i)
        bprime = hom_preimage(h, data.t, data.n, data.arc_j)
        xa = aprime.shift(data.x)
        yb = bprime.shift(data.y)
        if not a.issubset(xa) or not b.issubset(yb):  # (III.a)
            return False
        if len(xa.difference(a)) >= eps * q or len(yb.difference(b)) >= eps * q:  # (III.b)
            return False
        return True
    raise CertificateError(f"unknown stability case {case!r}")


# --- Bohr-interval fitting ---


@dataclass
class BohrFit:
    t: int
    n: int
    arc: tuple[int, int]
    error_mass: int


def _best_arc(weights: np.ndarray, fiber: int, card: int) -> tuple[tuple[int, int], int]:
    """Arc of Z/N minimizing |preimage(arc) symdiff S| given the projected
    member counts; ties prefer shorter arcs, then smaller start."""
    n = len(weights)
    gain = fiber - 2 * weights  # adding residue r to the arc changes symdiff by this
    doubled = np.concatenate([gain, gain])
    prefix = np.concatenate([[0], np.cumsum(doubled)])
    best = (0, 0)
    best_sum = 0  # empty arc
    for length in range(1, n + 1):
        sums = prefix[length : length + n] - prefix[0:n]
        start = int(np.argmin(sums))
        val = int(sums[start])
        if val < best_sum:
            best_sum = val
            best = (start, length)
    return best, card + best_sum


def covering_arc(present: np.ndarray, n: int) -> tuple[int, int]:
    """Shortest arc of Z/N containing every listed residue."""
    if len(present) == 0:
        return (0, 0)
    rs = np.unique(present)
    if len(rs) == n:
        return (0, n)
    gaps = np.diff(np.concatenate([rs, [rs[0] + n]]))
    j = int(np.argmax(gaps))
    start = int(rs[(j + 1) % len(rs)])
    return (start, n - int(gaps[j]) + 1)


def fit_bohr_interval(s: ZqSet) -> BohrFit:
    """Fit S subset Z/Q by the preimage of an arc under its dominant frequency.

    Takes the largest nonzero Fourier coefficient xi, reduces it to a unit t
    mod N = Q/gcd(xi, Q), projects through j -> t*j mod N, and picks the arc
    minimizing the symmetric difference (exact minimization via prefix sums).
    """
    if len(s) == 0:
        raise ValueError("need a nonempty set")
    q = s.q
    if q == 1:
        return BohrFit(0, 1, (0, 1), 0)
    hat = np.abs(np.fft.fft(s.bits.astype(float)))
    hat[0] = 0.0
    xi = int(np.argmax(hat))
    if hat[xi] < 1e-9:
        # Constant spectrum away from 0: S is empty or full; trivial fit.
        return BohrFit(0, 1, (0, 1), q - len(s))
    g = math.gcd(xi, q)
    n = q // g
    t = xi // g
    residues = (np.arange(q, dtype=np.int64) * t) % n
    weights = np.bincount(residues[s.bits], minlength=n)
    arc, err = _best_arc(weights, q // n, len(s))
    return BohrFit(t, n, arc, err)


def fit_bohr_interval_exhaustive(s: ZqSet) -> BohrFit:
    """Best arc-preimage fit over every frequency, not just the dominant one.

    Strictly better than fit_bohr_interval on some sets that are far from
    arc preimages; identical (error 0) on exact preimages.
    """
    if len(s) == 0:
        raise ValueError("need a nonempty set")
    q = s.q
    best = BohrFit(0, 1, (0, 1), q - len(s))
    js = np.arange(q, dtype=np.int64)
    for xi in range(1, q):
        g = math.gcd(xi, q)
        n = q // g
        t = xi // g
        residues = (js * t) % n
        weights = np.bincount(residues[s.bits], minlength=n)
        arc, err = _best_arc(weights, q // n, len(s))
        if err < best.error_mass:
            best = BohrFit(t, n, arc, err)
    return best


def frequencies_equivalent(t1: int, n1: int, t2: int, n2: int) -> bool:
    """Same frequency up to sign (reflection of the unit)."""
    return n1 == n2 and (t1 % n1 == t2 % n2 or (-t1) % n1 == t2 % n2)


# --- detection ---


def detect_structure(
    a: ZqSet,
    b: ZqSet,
    eps: float,
    eta: float,
    k: int,
    index_cap: int,
    delta: float = 0.01,
) -> StructureReport:
    """Try the four cases in order (i) expanding sumset, (ii) nearly full
    sumset, (iii) parallel Bohr arcs over a bounded-index subgroup, (iv)
    coset-concentrated A with sparse B0.  Returns the first certificate that
    verifies, or 'none'; detection never fabricates a certificate."""
    if len(a) < 1 or len(b) < 1:
        raise ValueError("sets must be nonempty")
    q = a.q
    s = sumset(a, b)
    base = dict(q=q, eps=eps, eta=eta, k=k, index_cap=index_cap)
    if len(s) >= (len(a) / q + len(b) / q + delta) * q:
        cert = StructureCertificate(case="i", delta=delta, **base)
        return StructureReport("i", cert, {"sumset_size": len(s)})
    if len(s) >= (1 - eps) * q:
        cert = StructureCertificate(case="ii", delta=delta, **base)
        return StructureReport("ii", cert, {"sumset_size": len(s)})

    subgroups = [h for h in all_subgroups(q) if h.index <= index_cap]
    for h in subgroups:
        found = _try_case_iii(a, b, h, base)
        if found is not None:
            return found
    for h in subgroups:
        found = _try_case_iv(a, b, h, base)
        if found is not None:
            return found
    return StructureReport("none", None)


def _coset_shift(a: ZqSet, h: Subgroup) -> Optional[int]:
    """Least a0 in A with A - a0 inside H, if A is within one coset."""
    members = np.flatnonzero(a.bits)
    if len(np.unique(members % h.d)) != 1:
        return None
    return int(members[0])


def _try_case_iii(a: ZqSet, b: ZqSet, h: Subgroup, base: dict) -> Optional[StructureReport]:
    a0 = _coset_shift(a, h)
    if a0 is None:
        return None
    part_a0 = a.shift(-a0)
    a0h = compress_to_subgroup(part_a0, h)
    if len(a0h) == 0:
        return None
    fit = fit_bohr_interval(a0h)
    if fit.n <= base["k"]:
        return None
    hset = h.as_set()
    eps, q = base["eps"], a.q
    js = np.arange(h.order, dtype=np.int64)
    proj = (js * fit.t) % fit.n
    for b0 in np.flatnonzero(b.bits):
        b0 = int(b0)
        shifted = b.shift(-b0)
        part_b0 = shifted.intersect(hset)
        part_b1 = shifted.difference(hset)
        if not len(part_b1) > q - h.order - eps * h.order:
            continue
        b0h = compress_to_subgroup(part_b0, h)
        weights = np.bincount(proj[b0h.bits], minlength=fit.n)
        arc_j, _ = _best_arc(weights, h.order // fit.n, len(b0h))
        arc_candidates_j = [arc_j, covering_arc(proj[b0h.bits], fit.n)]
        arc_candidates_i = [fit.arc, covering_arc(proj[a0h.bits], fit.n)]
        for arc_i in arc_candidates_i:
            for arc_jc in arc_candidates_j:
                cert = StructureCertificate(
                    case="iii",
                    subgroup=h,
                    a0=a0,
                    b0=b0,
                    part_a0=part_a0,
                    part_b0=part_b0,
                    part_b1=part_b1,
                    n=fit.n,
                    t=fit.t,
                    arc_i=arc_i,
                    arc_j=arc_jc,
                    **base,
                )
                if verify_case_iii(a, b, cert):
                    pre_i = hom_preimage(h, fit.t, fit.n, arc_i)
                    pre_j = hom_preimage(h, fit.t, fit.n, arc_jc)
                    masses = {
                        "I_minus_A0": len(pre_i.difference(part_a0)),
                        "J_minus_B0": len(pre_j.difference(part_b0)),
                        "complement_minus_B1": q - h.order - len(part_b1),
                    }
                    return StructureReport("iii", cert, masses, frequency=(fit.t, fit.n))
    return None


def _try_case_iv(a: ZqSet, b: ZqSet, h: Subgroup, base: dict) -> Optional[StructureReport]:
    a0 = _coset_shift(a, h)
    if a0 is None:
        return None
    part_a0 = a.shift(-a0)
    hset = h.as_set()
    eta, q = base["eta"], a.q
    for b0 in np.flatnonzero(b.bits):
        b0 = int(b0)
        shifted = b.shift(-b0)
        part_b0 = shifted.intersect(hset)
        part_b1 = shifted.difference(hset)
        cert = StructureCertificate(
            case="iv",
            subgroup=h,
            a0=a0,
            b0=b0,
            part_a0=part_a0,
            part_b0=part_b0,
            part_b1=part_b1,
            **base,
        )
        try:
            if verify_case_iv(a, b, cert):
                masses = {
                    "B0_size": len(part_b0),
                    "complement_minus_B1": q - h.order - len(part_b1),
                }
                return StructureReport("iv", cert, masses)
        except CertificateError:
            continue
    return None


# --- popular-sumset covers ---


def verify_popular_cover(
    a: ZqSet, b: ZqSet, a2: ZqSet, b2: ZqSet, delta: float, eps: float
) -> bool:
    """|A \\ A'| < eps Q, |B \\ B'| < eps Q, |(A'+B') \\ (A+_delta B)| < eps Q."""
    if not a2.issubset(a) or not b2.issubset(b):
        raise ValueError("A', B' must be subsets of A, B")
    q = a.q
    if len(a.difference(a2)) >= eps * q or len(b.difference(b2)) >= eps * q:
        return False
    pop = popular_sumset(a, b, delta)
    if len(a2) == 0 or len(b2) == 0:
        return True
    return len(sumset(a2, b2).difference(pop)) < eps * q


@dataclass
class PopularCover:
    a_prime: ZqSet
    b_prime: ZqSet
    removed: int
    exhaustive: bool


def find_popular_cover_small(
    a: ZqSet, b: ZqSet, delta: float, eps: float, budget: int = 200_000
) -> Optional[PopularCover]:
    """Smallest-removal (A', B') passing the cover check, by exhaustive search
    in increasing removal count; falls back to a flagged greedy heuristic when
    the budget runs out or Q > 12."""
    q = a.q
    if verify_popular_cover(a, b, a, b, delta, eps):
        return PopularCover(a, b, 0, True)
    if q <= 12:
        spent = 0
        amembers = a.elements()
        bmembers = b.elements()
        for removal in range(1, len(amembers) + len(bmembers) + 1):
            for ra in range(0, removal + 1):
                rb = removal - ra
                if ra > len(amembers) or rb > len(bmembers):
                    continue
                for drop_a in itertools.combinations(amembers, ra):
                    a2 = ZqSet.from_elements(q, sorted(set(amembers) - set(drop_a)))
                    for drop_b in itertools.combinations(bmembers, rb):
                        b2 = ZqSet.from_elements(q, sorted(set(bmembers) - set(drop_b)))
                        spent += 1
                        if spent > budget:
                            return _greedy_cover(a, b, delta, eps)
                        if verify_popular_cover(a, b, a2, b2, delta, eps):
                            return PopularCover(a2, b2, removal, True)
        return None
    return _greedy_cover(a, b, delta, eps)


def _greedy_cover(a: ZqSet, b: ZqSet, delta: float, eps: float) -> Optional[PopularCover]:
    """Drop the element whose removal shrinks the uncovered overshoot most."""
    pop = popular_sumset(a, b, delta)
    a2, b2 = a, b
    removed = 0
    max_removals = max(1, int(2 * eps * a.q))
    while removed <= max_removals:
        if verify_popular_cover(a, b, a2, b2, delta, eps):
            return PopularCover(a2, b2, removed, False)
        bad = len(sumset(a2, b2).difference(pop)) if len(a2) and len(b2) else 0
        best = None
        for side, current in (("a", a2), ("b", b2)):
            for x in current.elements():
                trial = current.difference(ZqSet.from_elements(a.q, [x]))
                other = b2 if side == "a" else a2
                if len(trial) == 0 or len(other) == 0:
                    overshoot = 0
                else:
                    pair = (trial, other) if side == "a" else (other, trial)
                    overshoot = len(sumset(*pair).difference(pop))
                if best is None or overshoot < best[0]:
                    best = (overshoot, side, x)
        if best is None or best[0] >= bad:
            return None
        _, side, x = best
        if side == "a":
            a2 = a2.difference(ZqSet.from_elements(a.q, [x]))
        else:
            b2 = b2.difference(ZqSet.from_elements(a.q, [x]))
        removed += 1
    return None
