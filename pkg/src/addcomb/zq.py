"""Exact set arithmetic over finite cyclic groups Z/Q.

Sets are dense, immutable bit vectors with the modulus attached.  Everything
here is exact integer arithmetic: the transform-backed convolution verifies
its rounding and the direct backend is plain enumeration, so the two can be
compared bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._convolve import RoundingError, cyclic_convolve_exact


class ModulusMismatch(ValueError):
    """Operands live in different cyclic groups."""


def _check_same_q(a: "ZqSet", b: "ZqSet") -> None:
    if a.q != b.q:
        raise ModulusMismatch(f"moduli differ: {a.q} != {b.q}")


class ZqSet:
    """Immutable subset of Z/Q as a dense bit vector."""

    __slots__ = ("q", "_bits", "_card")

    def __init__(self, q: int, bits: np.ndarray):
        if q < 1:
            raise ValueError("modulus must be positive")
        if bits.shape != (q,):
            raise ValueError("bit vector length must equal the modulus")
        self.q = int(q)
        b = np.ascontiguousarray(bits, dtype=bool)
        b.setflags(write=False)
        self._bits = b
        self._card = int(b.sum())

    @classmethod
    def from_elements(cls, q: int, elements: Iterable[int]) -> "ZqSet":
        bits = np.zeros(q, dtype=bool)
        for e in elements:
            if not 0 <= e < q:
                raise ValueError(f"element {e} outside [0, {q})")
            bits[e] = True
        return cls(q, bits)

    @classmethod
    def empty(cls, q: int) -> "ZqSet":
        return cls(q, np.zeros(q, dtype=bool))

    @classmethod
    def full(cls, q: int) -> "ZqSet":
        return cls(q, np.ones(q, dtype=bool))

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def elements(self) -> list[int]:
        return [int(x) for x in np.flatnonzero(self._bits)]

    def __len__(self) -> int:
        return self._card

    def __contains__(self, x: int) -> bool:
        return bool(self._bits[x % self.q])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ZqSet):
            return NotImplemented
        return self.q == other.q and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash((self.q, self._bits.tobytes()))

    def __repr__(self) -> str:
        els = self.elements()
        shown = els if len(els) <= 12 else els[:12] + ["..."]
        return f"ZqSet(Q={self.q}, {{{', '.join(map(str, shown))}}})"

    def shift(self, c: int) -> "ZqSet":
        """Translate: {x + c mod Q : x in self}."""
        return ZqSet(self.q, np.roll(self._bits, c % self.q))

    def negate(self) -> "ZqSet":
        """{-x mod Q : x in self}."""
        bits = self._bits
        out = np.empty_like(bits)
        out[0] = bits[0]
        out[1:] = bits[:0:-1]
        return ZqSet(self.q, out)

    def union(self, other: "ZqSet") -> "ZqSet":
        _check_same_q(self, other)
        return ZqSet(self.q, self._bits | other._bits)

    def intersect(self, other: "ZqSet") -> "ZqSet":
        _check_same_q(self, other)
        return ZqSet(self.q, self._bits & other._bits)

    def difference(self, other: "ZqSet") -> "ZqSet":
        _check_same_q(self, other)
        return ZqSet(self.q, self._bits & ~other._bits)

    def complement(self) -> "ZqSet":
        return ZqSet(self.q, ~self._bits)

    def issubset(self, other: "ZqSet") -> bool:
        _check_same_q(self, other)
        return not bool(np.any(self._bits & ~other._bits))

    # Serialization.  Canonical form: sorted element list; the hex form packs
    # the bit vector little-endian as a compact alternative.

    def to_json(self) -> str:
        return json.dumps({"Q": self.q, "elements": self.elements()})

    @classmethod
    def from_json(cls, text: str) -> "ZqSet":
        obj = json.loads(text)
        return cls.from_elements(int(obj["Q"]), obj["elements"])

    def to_text(self) -> str:
        lines = [f"Q={self.q}"] + [str(e) for e in self.elements()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ZqSet":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("Q="):
            raise ValueError("expected a header line 'Q=<int>'")
        q = int(lines[0][2:])
        return cls.from_elements(q, (int(ln) for ln in lines[1:]))

    def to_hex(self) -> str:
        return bytes(np.packbits(self._bits, bitorder="little")).hex()

    @classmethod
    def from_hex(cls, q: int, hexstr: str) -> "ZqSet":
        packed = np.frombuffer(bytes.fromhex(hexstr), dtype=np.uint8)
        bits = np.unpackbits(packed, bitorder="little")[:q].astype(bool)
        return cls(q, bits)


@dataclass(frozen=True)
class PairCountVector:
    """counts[x] = #{(a, b) in A x B : a + b = x mod Q}."""

    q: int
    counts: np.ndarray

    def __post_init__(self):
        self.counts.setflags(write=False)

    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class Subgroup:
    """Subgroup d*Z/Q of Z/Q, identified by its generating divisor d (= index)."""

    q: int
    d: int
    vacuous: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.q % self.d != 0:
            raise ValueError(f"{self.d} does not divide {self.q}")

    @property
    def index(self) -> int:
        return self.d

    @property
    def order(self) -> int:
        return self.q // self.d

    def as_set(self) -> ZqSet:
        bits = np.zeros(self.q, dtype=bool)
        bits[:: self.d] = True
        return ZqSet(self.q, bits)

    def contains(self, x: int) -> bool:
        return x % self.d == 0


def sumset(a: ZqSet, b: ZqSet) -> ZqSet:
    """{x + y mod Q : x in A, y in B}."""
    _check_same_q(a, b)
    q = a.q
    if len(a) == 0 or len(b) == 0:
        return ZqSet.empty(q)
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    # Rotate-accumulate beats the transform for sparse inputs.
    if len(small) <= 64 * (int(math.log2(q)) + 1):
        out = np.zeros(q, dtype=bool)
        bigbits = big.bits
        for s in np.flatnonzero(small.bits):
            out |= np.roll(bigbits, int(s))
        return ZqSet(q, out)
    return ZqSet(q, pair_counts(a, b).counts > 0)


def pair_counts(a: ZqSet, b: ZqSet, method: str = "auto") -> PairCountVector:
    """Exact representation counts of every x as a + b mod Q.

    method: 'direct' (rotate-accumulate enumeration), 'transform'
    (verified-rounding FFT), or 'auto'.
    """
    _check_same_q(a, b)
    q = a.q
    if method not in ("auto", "direct", "transform"):
        raise ValueError(f"unknown method {method!r}")
    if len(a) == 0 or len(b) == 0:
        return PairCountVector(q, np.zeros(q, dtype=np.int64))
    if method == "direct" or (method == "auto" and min(len(a), len(b)) <= 32):
        return PairCountVector(q, _pair_counts_direct(a, b))
    try:
        counts = cyclic_convolve_exact(a.bits.astype(np.int64), b.bits.astype(np.int64))
    except RoundingError:
        counts = _pair_counts_direct(a, b)
    return PairCountVector(q, counts)


def _pair_counts_direct(a: ZqSet, b: ZqSet) -> np.ndarray:
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    counts = np.zeros(a.q, dtype=np.int64)
    bigbits = big.bits.astype(np.int64)
    for s in np.flatnonzero(small.bits):
        counts += np.roll(bigbits, int(s))
    return counts


def popular_sumset(a: ZqSet, b: ZqSet, delta: float) -> ZqSet:
    """{x : counts[x] > delta * Q}, the delta-popular sumset."""
    _check_same_q(a, b)
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    counts = pair_counts(a, b).counts
    return ZqSet(a.q, counts > delta * a.q)


def stabilizer(s: ZqSet) -> Subgroup:
    """Largest subgroup H with S + H = S.

    The empty set is stabilized by everything; by convention the full group
    is returned with the vacuous flag set so sweeps stay branch-free.
    """
    q = s.q
    if len(s) == 0:
        return Subgroup(q, 1, vacuous=True)
    # The periods of S form a subgroup, so the smallest divisor-period
    # generates it; d = q (the trivial subgroup) always qualifies.
    for d in divisors(q):
        if np.array_equal(np.roll(s.bits, d), s.bits):
            return Subgroup(q, d)
    return Subgroup(q, q)


def divisors(q: int) -> list[int]:
    """Divisors of q in ascending order."""
    small, large = [], []
    i = 1
    while i * i <= q:
        if q % i == 0:
            small.append(i)
            if i != q // i:
                large.append(q // i)
        i += 1
    return small + large[::-1]


def all_subgroups(q: int) -> list[Subgroup]:
    """One subgroup per divisor of Q, sorted by index ascending."""
    if q < 1:
        raise ValueError("modulus must be positive")
    return [Subgroup(q, d) for d in divisors(q)]


def coset_saturation(a: ZqSet, h: Subgroup) -> ZqSet:
    """A + H: union of all H-cosets meeting A."""
    if a.q != h.q:
        raise ModulusMismatch(f"moduli differ: {a.q} != {h.q}")
    residues = np.zeros(h.d, dtype=bool)
    hit = np.flatnonzero(a.bits) % h.d
    residues[hit] = True
    idx = np.arange(a.q) % h.d
    return ZqSet(a.q, residues[idx])


def meets_all_cosets(b: ZqSet, max_index: int) -> bool:
    """True iff B meets every coset of every subgroup of index <= max_index."""
    if len(b) == 0:
        return max_index < 1
    members = np.flatnonzero(b.bits)
    for d in divisors(b.q):
        if d > max_index:
            continue
        if len(np.unique(members % d)) != d:
            return False
    return True
