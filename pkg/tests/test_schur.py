import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aztec_rect.schur import (
    BetaWeight,
    branch_partition_sum,
    det_bareiss,
    dim,
    is_interlacing,
    is_vertical_strip,
    pr_prob,
    shifted_coords,
    st_prob,
    strip_partition_sum,
    superfactorial,
)
from oracles import brute_branch_sum, brute_strip_sum, count_ssyt, vandermonde

HALF = Fraction(1, 2)


def signatures_in_box(rows, cols):
    """All signatures of length `rows` inside a rows x cols box."""
    out = []
    for parts in itertools.product(range(cols, -1, -1), repeat=rows):
        if all(parts[i] >= parts[i + 1] for i in range(rows - 1)):
            out.append(parts)
    return out


class TestDim:
    def test_empty_shape(self):
        for n in range(1, 6):
            assert dim((0,) * n, n) == 1

    def test_small_examples(self):
        assert dim((1, 0), 2) == 2
        assert dim((2, 1, 0), 3) == 8

    def test_matches_ssyt_count(self):
        for n in range(1, 5):
            for la in signatures_in_box(n, 3):
                assert dim(la, n) == count_ssyt(la, n)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dim((1, 0), 3)


class TestPredicates:
    def test_vertical_strip(self):
        assert is_vertical_strip((0, 0), (1, 0))
        assert not is_vertical_strip((2, 0), (3, 2))
        assert not is_vertical_strip((1, 0), (1,))

    def test_interlacing(self):
        assert is_interlacing((1,), (1, 0))
        assert not is_interlacing((0,), (2, 1))
        assert not is_interlacing((1, 0), (1, 0))

    @given(st.lists(st.integers(0, 4), min_size=1, max_size=5))
    def test_strip_matches_definition(self, raw):
        mu = tuple(sorted(raw, reverse=True))
        for nu in itertools.product(*[(p, p + 1) for p in mu]):
            expected = all(nu[i] >= nu[i + 1] for i in range(len(nu) - 1))
            assert is_vertical_strip(mu, nu) == expected


class TestDeterminant:
    def test_known(self):
        assert det_bareiss([[1, 2], [3, 4]]) == -2
        assert det_bareiss([[2]]) == 2
        assert det_bareiss([]) == 1

    def test_singular(self):
        assert det_bareiss([[1, 2], [2, 4]]) == 0

    @given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3),
                    min_size=3, max_size=3))
    @settings(max_examples=50)
    def test_matches_cofactor_expansion(self, m):
        a, b, c = m
        expected = (
            a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
        )
        assert det_bareiss(m) == expected


class TestStripPartitionSum:
    def test_examples(self):
        assert strip_partition_sum((1, 0), (), HALF) == 1
        assert strip_partition_sum((1, 0), (1,), HALF) == Fraction(3, 4)
        for l in [(0,), (5,)]:
            for beta in (HALF, Fraction(1, 3)):
                assert strip_partition_sum(l, (), beta) == 1

    def test_brute_force(self):
        cases = [
            ((3, 1, 0), (), HALF),
            ((3, 1, 0), (1,), Fraction(1, 3)),
            ((4, 3, 2, 0), (0, 1), Fraction(2, 7)),
            ((9, 5, 2, 1, 0), (1, 0, 1), Fraction(3, 5)),
        ]
        for l, prefix, beta in cases:
            assert strip_partition_sum(l, prefix, beta) == brute_strip_sum(
                l, prefix, beta
            )

    def test_empty_prefix_equals_vandermonde(self):
        # the full weighted sum telescopes to V(l) (strip weights sum to 1)
        for l in [(2, 0), (5, 3, 1), (7, 4, 2, 0)]:
            assert strip_partition_sum(l, (), Fraction(2, 5)) == vandermonde(l)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            strip_partition_sum((1, 1), (), HALF)
        with pytest.raises(ValueError):
            strip_partition_sum((1, 0), (2,), HALF)


class TestBranchPartitionSum:
    def test_examples(self):
        assert branch_partition_sum([(0, 1)]) == 2  # equals dim((1,0), 2)
        assert branch_partition_sum([(0, 2)]) == 3  # equals dim((2,0), 2)

    def test_all_fixed_is_vandermonde(self):
        intervals = [(4, 6), (1, 3), (0, 0)]
        assert branch_partition_sum(intervals, (5, 2, 0)) == vandermonde((5, 2, 0))

    def test_brute_force(self):
        cases = [
            ([(2, 4), (0, 1)], ()),
            ([(5, 7), (2, 4), (0, 1)], (6,)),
            ([(4, 4), (1, 3), (0, 0)], ()),
        ]
        for intervals, prefix in cases:
            assert branch_partition_sum(intervals, prefix) == brute_branch_sum(
                intervals, prefix
            )

    def test_equals_branching_dimension_sum(self):
        # sum over interlacing mu of dim(mu, n-1) = dim(nu, n)
        for n in range(2, 6):
            for nu in signatures_in_box(n, 3):
                l = shifted_coords(nu, n)
                intervals = [(l[i + 1], l[i] - 1) for i in range(n - 1)]
                total = branch_partition_sum(intervals)
                assert total == dim(nu, n) * superfactorial(n - 1)

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            branch_partition_sum([(3, 2)])


class TestTransitionProbabilities:
    def test_st_examples(self):
        assert st_prob((0, 0), (1, 0), 2, HALF) == HALF
        assert st_prob((0, 0), (1, 1), 2, Fraction(1, 3)) == Fraction(1, 9)
        assert st_prob((2, 0), (3, 2), 2, HALF) == 0

    def test_st_pieri_distribution(self):
        dist = {
            nu: st_prob((0, 0), nu, 2, HALF)
            for nu in [(0, 0), (1, 0), (1, 1)]
        }
        assert dist == {(0, 0): Fraction(1, 4), (1, 0): HALF, (1, 1): Fraction(1, 4)}

    def test_st_normalised(self):
        for n in range(1, 7):
            for mu in signatures_in_box(n, 3):
                total = sum(
                    st_prob(mu, nu, n, Fraction(2, 7))
                    for nu in itertools.product(*[(p, p + 1) for p in mu])
                    if is_vertical_strip(mu, nu)
                )
                assert total == 1

    def test_pr_examples(self):
        assert pr_prob((1, 0), (0,)) == HALF
        assert pr_prob((1, 0), (1,)) == HALF
        assert pr_prob((0, 0), (0,)) == 1
        assert pr_prob((2, 0), (3,)) == 0

    def test_pr_normalised(self):
        for n in range(2, 6):
            for nu in signatures_in_box(n, 3):
                total = Fraction(0)
                for mu in itertools.product(
                    *[range(nu[i + 1], nu[i] + 1) for i in range(n - 1)]
                ):
                    total += pr_prob(nu, mu)
                assert total == 1

    def test_probabilities_in_range(self):
        beta = Fraction(3, 11)
        for mu in signatures_in_box(3, 2):
            for nu in itertools.product(*[(p, p + 1) for p in mu]):
                p = st_prob(mu, nu, 3, beta)
                assert 0 <= p <= 1


class TestBetaWeight:
    def test_uniform_is_half(self):
        assert BetaWeight.from_q(1).beta == HALF
        assert BetaWeight(HALF).q == 1

    def test_q_roundtrip(self):
        for q in (Fraction(1, 3), Fraction(3), Fraction(7, 2)):
            assert BetaWeight.from_q(q).q == q

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            BetaWeight(Fraction(1))
        with pytest.raises(ValueError):
            BetaWeight.from_q(0)
