"""Shared instance generators for the test suite."""

import math

from addcomb.inverse import hom_preimage
from addcomb.zq import Subgroup, ZqSet


def arc_preimage_set(q: int, t: int, n: int, arc: tuple[int, int]) -> ZqSet:
    return hom_preimage(Subgroup(q, 1), t, n, arc)


def random_parallel_arc_instance(rng, moduli=(105, 512, 1024)):
    """Parallel arc-preimage pair with relative arc lengths in [0.1, 0.4].

    Length-1 arcs are subgroup cosets: their flat spectrum leaves the unit t
    unidentifiable (and at composite N even the quotient), so lengths stay
    >= 2, which keeps 2/n inside the stated band for every n >= 5.
    """
    q = int(rng.choice(moduli))
    divs = [n for n in range(5, 40) if q % n == 0]
    n = int(rng.choice(divs))
    units = [t for t in range(1, n) if math.gcd(t, n) == 1]
    t = int(rng.choice(units))
    lo = max(2, math.ceil(0.1 * n))
    hi = max(lo, math.floor(0.4 * n))
    len_i = int(rng.integers(lo, hi + 1))
    len_j = int(rng.integers(lo, hi + 1))
    a = arc_preimage_set(q, t, n, (int(rng.integers(n)), len_i))
    b = arc_preimage_set(q, t, n, (int(rng.integers(n)), len_j))
    return q, n, t, a, b
