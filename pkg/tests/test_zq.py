"""Core cyclic-group set arithmetic: sumsets, counts, stabilizers, cosets."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from addcomb.zq import (
    ModulusMismatch,
    Subgroup,
    ZqSet,
    all_subgroups,
    coset_saturation,
    divisors,
    meets_all_cosets,
    pair_counts,
    popular_sumset,
    stabilizer,
    sumset,
)


def brute_sumset(a: ZqSet, b: ZqSet) -> set[int]:
    return {(x + y) % a.q for x in a.elements() for y in b.elements()}


def brute_counts(a: ZqSet, b: ZqSet) -> list[int]:
    counts = [0] * a.q
    for x in a.elements():
        for y in b.elements():
            counts[(x + y) % a.q] += 1
    return counts


def zq_subsets(q: int):
    """Strategy generating arbitrary subsets of Z/q."""
    return st.sets(st.integers(0, q - 1)).map(lambda s: ZqSet.from_elements(q, s))


class TestSumset:
    def test_small_example(self):
        a = ZqSet.from_elements(5, [0, 1])
        assert sumset(a, a).elements() == [0, 1, 2]

    def test_empty_operand(self):
        assert len(sumset(ZqSet.empty(6), ZqSet.from_elements(6, [2]))) == 0

    def test_subgroup_closed(self):
        h = ZqSet.from_elements(6, [0, 3])
        assert sumset(h, h) == h

    def test_modulus_mismatch(self):
        with pytest.raises(ModulusMismatch):
            sumset(ZqSet.empty(5), ZqSet.empty(6))

    def test_identity_element(self):
        a = ZqSet.from_elements(9, [1, 4, 7])
        assert sumset(a, ZqSet.from_elements(9, [0])) == a

    @given(st.integers(2, 24).flatmap(lambda q: st.tuples(zq_subsets(q), zq_subsets(q))))
    @settings(max_examples=150, deadline=None)
    def test_matches_enumeration(self, pair):
        a, b = pair
        assert set(sumset(a, b).elements()) == brute_sumset(a, b)

    @given(st.integers(2, 16).flatmap(lambda q: st.tuples(zq_subsets(q), zq_subsets(q), zq_subsets(q))))
    @settings(max_examples=80, deadline=None)
    def test_commutative_associative(self, triple):
        a, b, c = triple
        assert sumset(a, b) == sumset(b, a)
        assert sumset(sumset(a, b), c) == sumset(a, sumset(b, c))


class TestPairCounts:
    def test_small_example(self):
        a = ZqSet.from_elements(4, [0, 1])
        assert pair_counts(a, a).counts.tolist() == [1, 2, 1, 0]

    def test_empty(self):
        a = ZqSet.empty(7)
        b = ZqSet.full(7)
        assert pair_counts(a, b).counts.tolist() == [0] * 7

    def test_full_group(self):
        f = ZqSet.full(5)
        assert pair_counts(f, f).counts.tolist() == [5] * 5

    def test_backends_agree_random(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            q = int(rng.integers(2, 4097))
            target = min(q, 1024)
            p = rng.uniform(0.05, 1.0) * target / q
            abits = rng.random(q) < p
            bbits = rng.random(q) < p
            a, b = ZqSet(q, abits), ZqSet(q, bbits)
            direct = pair_counts(a, b, method="direct").counts
            transform = pair_counts(a, b, method="transform").counts
            assert np.array_equal(direct, transform)

    def test_backends_agree_large_q(self):
        rng = np.random.default_rng(11)
        for q in (10000, 30000, 65536):
            keep = rng.choice(q, size=800, replace=False)
            bits = np.zeros(q, dtype=bool)
            bits[keep] = True
            a = ZqSet(q, bits)
            direct = pair_counts(a, a, method="direct").counts
            transform = pair_counts(a, a, method="transform").counts
            assert np.array_equal(direct, transform)

    @given(st.integers(2, 20).flatmap(lambda q: st.tuples(zq_subsets(q), zq_subsets(q))))
    @settings(max_examples=100, deadline=None)
    def test_matches_enumeration(self, pair):
        a, b = pair
        counts = pair_counts(a, b)
        assert counts.counts.tolist() == brute_counts(a, b)
        assert counts.total() == len(a) * len(b)
        if len(a) and len(b):
            assert counts.counts.max() <= min(len(a), len(b))


class TestPopularSumset:
    def test_delta_zero_is_sumset(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            q = int(rng.integers(2, 64))
            a = ZqSet(q, rng.random(q) < 0.4)
            b = ZqSet(q, rng.random(q) < 0.4)
            assert popular_sumset(a, b, 0.0) == sumset(a, b)

    def test_quarter_threshold(self):
        a = ZqSet.from_elements(4, [0, 1])
        assert popular_sumset(a, a, 0.25).elements() == [1]

    def test_delta_one_empty(self):
        f = ZqSet.full(6)
        assert len(popular_sumset(f, f, 1.0)) == 0

    def test_delta_out_of_range(self):
        a = ZqSet.full(4)
        with pytest.raises(ValueError):
            popular_sumset(a, a, 1.5)

    @given(
        st.integers(2, 16).flatmap(lambda q: st.tuples(zq_subsets(q), zq_subsets(q))),
        st.floats(0.0, 1.0),
        st.floats(0.0, 1.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_containment_and_monotone(self, pair, d1, d2):
        a, b = pair
        lo, hi = min(d1, d2), max(d1, d2)
        assert popular_sumset(a, b, hi).issubset(popular_sumset(a, b, lo))
        assert popular_sumset(a, b, lo).issubset(sumset(a, b))


class TestStabilizer:
    def test_period_three(self):
        s = ZqSet.from_elements(6, [0, 3])
        assert stabilizer(s).d == 3

    def test_full_group(self):
        assert stabilizer(ZqSet.full(8)).d == 1

    def test_singleton(self):
        h = stabilizer(ZqSet.from_elements(6, [0]))
        assert h.d == 6 and h.order == 1

    def test_empty_flagged(self):
        h = stabilizer(ZqSet.empty(6))
        assert h.d == 1 and h.vacuous

    @given(st.integers(2, 24).flatmap(zq_subsets))
    @settings(max_examples=150, deadline=None)
    def test_maximality(self, s):
        if len(s) == 0:
            return
        h = stabilizer(s)
        assert sumset(s, h.as_set()) == s
        for d in divisors(s.q):
            bigger = Subgroup(s.q, d)
            if bigger.order > h.order:
                assert sumset(s, bigger.as_set()) != s


class TestSubgroups:
    def test_q6(self):
        subs = all_subgroups(6)
        assert [h.d for h in subs] == [1, 2, 3, 6]

    def test_trivial_modulus(self):
        assert [h.d for h in all_subgroups(1)] == [1]

    def test_prime(self):
        assert [h.d for h in all_subgroups(7)] == [1, 7]

    def test_index_times_order(self):
        for h in all_subgroups(12):
            assert h.index * h.order == 12
            assert len(h.as_set()) == h.order


class TestMeetsAllCosets:
    def brute(self, b: ZqSet, max_index: int) -> bool:
        for d in divisors(b.q):
            if d > max_index:
                continue
            for c in range(d):
                coset = {c + k * d for k in range(b.q // d)}
                if not coset & set(b.elements()):
                    return False
        return True

    def test_full_group(self):
        assert meets_all_cosets(ZqSet.full(12), 12)

    def test_odd_pair_misses_even_coset(self):
        b = ZqSet.from_elements(6, [1, 5])
        assert meets_all_cosets(b, 1)
        assert not meets_all_cosets(b, 2)
        assert not meets_all_cosets(b, 3)

    def test_missing_one_coset(self):
        b = ZqSet.from_elements(6, [1, 2, 4, 5])  # full minus the coset {0, 3}
        assert not meets_all_cosets(b, 3)
        assert meets_all_cosets(b, 2)

    @given(st.integers(2, 18).flatmap(zq_subsets), st.integers(1, 18))
    @settings(max_examples=150, deadline=None)
    def test_matches_enumeration(self, b, max_index):
        assert meets_all_cosets(b, max_index) == self.brute(b, max_index)


class TestCosetSaturation:
    @given(st.integers(2, 20).flatmap(zq_subsets), st.data())
    @settings(max_examples=100, deadline=None)
    def test_matches_sumset(self, a, data):
        d = data.draw(st.sampled_from(divisors(a.q)))
        h = Subgroup(a.q, d)
        assert coset_saturation(a, h) == sumset(a, h.as_set()) if len(a) else True


class TestKneserIdentity:
    def test_exhaustive_small(self):
        # |A+B| < |A|+|B| forces A+B to be a union of cosets of its
        # stabilizer H with |A+B| = |A+H| + |B+H| - |H|.
        for q in range(2, 8):
            for abits in range(1, 2**q):
                a = ZqSet(q, np.array([(abits >> i) & 1 for i in range(q)], dtype=bool))
                for bbits in range(1, 2**q):
                    b = ZqSet(q, np.array([(bbits >> i) & 1 for i in range(q)], dtype=bool))
                    s = sumset(a, b)
                    if len(s) < len(a) + len(b):
                        h = stabilizer(s)
                        ah = coset_saturation(a, h)
                        bh = coset_saturation(b, h)
                        assert len(s) == len(ah) + len(bh) - h.order


class TestSerialization:
    def test_json_round_trip(self):
        a = ZqSet.from_elements(10, [9, 1, 4])
        assert ZqSet.from_json(a.to_json()) == a
        assert '"elements": [1, 4, 9]' in a.to_json()

    def test_text_round_trip(self):
        a = ZqSet.from_elements(7, [0, 2, 5])
        text = a.to_text()
        assert text.splitlines()[0] == "Q=7"
        assert ZqSet.from_text(text) == a

    def test_hex_round_trip(self):
        a = ZqSet.from_elements(13, [0, 7, 12])
        assert ZqSet.from_hex(13, a.to_hex()) == a

    def test_bad_header(self):
        with pytest.raises(ValueError):
            ZqSet.from_text("elements\n1\n2\n")

    def test_immutability(self):
        a = ZqSet.from_elements(5, [1])
        with pytest.raises(ValueError):
            a.bits[0] = True
