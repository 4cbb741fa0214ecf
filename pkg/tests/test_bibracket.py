from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_bibracket, brute_zeta_q, divisor_sigma
from qmzv.bibracket import (
    BiBracketIndex,
    IndexFamily,
    QAnalogueSpec,
    bibracket_batch,
    bibracket_series,
    convert_zeta_to_depth1_basis,
    depth1_basis,
    derive_index,
    eisenstein,
    enumerate_indices,
    model_spec,
    zeta_q_series,
)
from qmzv.errors import BasisViolation, DomainError, FactorialNotInvertible, SpecViolation
from qmzv.qseries import DEFAULT_PRIME, RationalPolynomial, RingSpec, TruncatedQSeries, sigma_series

QQ = RingSpec.rational()
FP = RingSpec.prime_field(DEFAULT_PRIME)
t = RationalPolynomial.monomial
B = BiBracketIndex


class TestIndex:
    def test_weight_depth(self):
        idx = B((3, 1), (0, 2))
        assert (idx.weight, idx.depth) == (6, 2)
        assert B().weight == 0 and B().depth == 0

    def test_rejects_invalid(self):
        with pytest.raises(DomainError):
            B((0,), (0,))
        with pytest.raises(DomainError):
            B((1,), (0, 1))

    def test_str(self):
        assert str(B.bracket(2)) == "[2]"
        assert str(B((1, 1), (0, 1))) == "[1,1|0,1]"


class TestEnumerate:
    def test_small(self):
        assert enumerate_indices(1, 1) == [B(), B.bracket(1)]
        assert set(enumerate_indices(2, 1)) == {B(), B.bracket(1), B.bracket(2), B((1,), (1,))}

    def test_brackets123(self):
        got = enumerate_indices(3, 2, IndexFamily.BRACKETS123)
        want = [(), (1,), (2,), (1, 1), (3,), (1, 2), (2, 1)]
        assert set(got) == {B.bracket(*s) for s in want}

    def test_order_is_weight_then_depth(self):
        keys = [(i.weight, i.depth) for i in enumerate_indices(6, 6)]
        assert keys == sorted(keys)

    def test_family_constraints(self):
        for idx in enumerate_indices(6, 6, IndexFamily.POSITIVE):
            assert all(s > r for s, r in zip(idx.s, idx.r))
        for idx in enumerate_indices(6, 6, IndexFamily.BRACKETS_GE2):
            assert idx.is_bracket and all(s >= 2 for s in idx.s)

    def test_count_against_formula(self):
        # an index of weight w and depth l is a composition of w into l parts p_j, with p_j choices of s_j
        def count(w, l):
            if l == 0:
                return int(w == 0)
            return sum(p * count(w - p, l - 1) for p in range(1, w + 1))

        assert len(enumerate_indices(7, 7)) == sum(count(w, l) for w in range(8) for l in range(w + 1))

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            enumerate_indices(-1, 2)


class TestSeries:
    def test_empty(self):
        assert bibracket_series(B(), 5, QQ).tolist() == [1, 0, 0, 0, 0, 0]

    def test_sigma1(self):
        assert bibracket_series(B.bracket(2), 6, QQ).tolist() == [0, 1, 3, 4, 7, 6, 12]

    def test_uv_swap(self):
        assert bibracket_series(B((1,), (1,)), 40, QQ) == bibracket_series(B.bracket(2), 40, QQ)

    @pytest.mark.parametrize(
        "s,r", [((1,), (0,)), ((3,), (2,)), ((1, 1), (0, 0)), ((2, 1), (1, 0)), ((1, 2), (0, 3)), ((2, 1, 1), (0, 1, 0))]
    )
    def test_against_defining_sum(self, s, r):
        assert bibracket_series(B(s, r), 24, QQ).tolist() == brute_bibracket(s, r, 24)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 3), st.integers(0, 2)), min_size=1, max_size=3))
    def test_random_against_defining_sum(self, pairs):
        s, r = zip(*pairs)
        assert bibracket_series(B(s, r), 18, QQ).tolist() == brute_bibracket(s, r, 18)

    @pytest.mark.parametrize("k", range(1, 11))
    def test_depth_one_brackets_are_sigma(self, k):
        assert bibracket_series(B.bracket(k), 500, FP) == sigma_series(k, 500, FP)

    def test_prime_reduction_matches_rationals(self):
        idx = [i for i in enumerate_indices(5, 3) if i.depth]
        exact = bibracket_batch(idx, 40, QQ)
        modp = bibracket_batch(idx, 40, FP)
        for i in idx:
            assert modp[i].tolist() == [FP.element(c) for c in exact[i].tolist()]

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 3), st.integers(0, 2)), min_size=1, max_size=3))
    def test_truncation_consistency(self, pairs):
        s, r = zip(*pairs)
        short = bibracket_series(B(s, r), 30, FP)
        long = bibracket_series(B(s, r), 60, FP)
        assert short == long.truncate(30)

    def test_batch_independent_of_workers(self):
        idx = enumerate_indices(6, 4)
        one = bibracket_batch(idx, 80, FP, workers=1)
        four = bibracket_batch(idx, 80, FP, workers=4)
        assert all(one[i] == four[i] for i in idx)

    def test_factorial_not_invertible(self):
        small = RingSpec.prime_field(1048583)  # smallest prime above 2^20
        bibracket_series(B.bracket(5), 10, small)  # fine
        with pytest.raises(FactorialNotInvertible):
            bibracket_series(B((1,), (1048583,)), 10, small)


class TestZeta:
    def test_depth_one(self):
        assert zeta_q_series(QAnalogueSpec((2,), (t(1),)), 4, QQ).tolist() == [0, 1, 3, 4, 7]
        assert zeta_q_series(QAnalogueSpec((1,), (t(1),)), 4, QQ).tolist() == [0, 1, 2, 2, 3]

    def test_fildefect_example(self):
        lhs = bibracket_series(B((1, 1), (0, 1)), 60, QQ)
        rhs = zeta_q_series(QAnalogueSpec((1, 1), (t(1), t(1))), 60, QQ) + zeta_q_series(
            QAnalogueSpec((1, 1, 1), (t(1), t(1), RationalPolynomial((1, -1)))), 60, QQ
        )
        assert lhs == rhs

    @pytest.mark.parametrize(
        "s,Q",
        [((2, 1), ((0, 0, 1), (0, 1))), ((3,), ((0, 1, 1),)), ((1, 0), ((0, 1), (1,))), ((2, 2), ((0, 1), (1, -1)))],
    )
    def test_against_sympy(self, s, Q):
        spec = QAnalogueSpec(s, tuple(RationalPolynomial(q) for q in Q))
        assert zeta_q_series(spec, 12, QQ).tolist() == brute_zeta_q(s, Q, 12)

    def test_requires_zero_constant_term(self):
        with pytest.raises(SpecViolation):
            QAnalogueSpec((1,), (RationalPolynomial((1, 1)),))

    def test_space_membership_flags(self):
        spec = QAnalogueSpec((2, 1), (t(2), t(1)))
        assert spec.in_space() and spec.in_space(circle=True)
        assert not spec.in_space(d=1)
        assert not QAnalogueSpec((2, 1), (t(1), RationalPolynomial((1,)))).in_space(circle=True)


class TestModels:
    def test_examples(self):
        assert model_spec("Okounkov", (3,)).Q == (t(1) + t(2),)
        assert model_spec("SZ", (2, 1)).Q == (t(2), t(1))
        assert model_spec("OOZ", (2, 3)).Q == (t(1), t(0))
        assert model_spec("BZ", (2, 1)).Q == (t(1), t(0))

    def test_sz_zero_entries_carry_filtration(self):
        spec = model_spec("SZ", (2, 0, 1))
        assert spec.filtration == (4, 4)
        assert spec.Q[1] == t(0)

    @pytest.mark.parametrize("model,s", [("BZ", (1,)), ("SZ", (0,)), ("OOZ", (0,)), ("Okounkov", (1,)), ("XX", (2,))])
    def test_domain_errors(self, model, s):
        with pytest.raises(DomainError):
            model_spec(model, s)

    def test_sz_depth_one_is_bracket(self):
        assert zeta_q_series(model_spec("SZ", (1,)), 30, QQ) == bibracket_series(B.bracket(1), 30, QQ)


class TestDerivation:
    def test_examples(self):
        assert derive_index(B.bracket(3)) == {B((4,), (1,)): 3}
        assert derive_index(B()) == {}
        assert derive_index(B.bracket(1, 1)) == {B((2, 1), (1, 0)): 1, B((1, 2), (0, 1)): 1}

    def test_weight_shift(self):
        for idx in enumerate_indices(5, 5):
            assert all(j.weight == idx.weight + 2 and j.depth == idx.depth for j in derive_index(idx))

    def test_matches_q_derivative(self):
        from qmzv.qseries import q_derivative

        for idx in enumerate_indices(4, 4):
            rhs = TruncatedQSeries.zero(QQ, 50)
            for j, c in derive_index(idx).items():
                rhs = rhs + bibracket_series(j, 50, QQ).scale(c)
            assert q_derivative(bibracket_series(idx, 50, QQ)) == rhs


class TestEisenstein:
    def test_constants(self):
        assert eisenstein(2, 5)[0] == Fraction(-1, 24)
        assert eisenstein(4, 5)[0] == Fraction(1, 1440)
        assert eisenstein(6, 5)[0] == Fraction(-1, 60480)

    def test_non_constant_part(self):
        g2 = eisenstein(2, 30)
        assert (g2 - TruncatedQSeries.from_values(QQ, [g2[0]], 30)) == bibracket_series(B.bracket(2), 30, QQ)

    def test_rejects_other_weights(self):
        with pytest.raises(DomainError):
            eisenstein(8, 5)

    def test_coefficients(self):
        g4 = eisenstein(4, 10)
        assert g4.tolist()[1:] == [Fraction(divisor_sigma(3, n), 6) for n in range(1, 11)]


class TestDepthOneBasis:
    def test_examples(self):
        assert convert_zeta_to_depth1_basis(t(1), 1) == [1]
        assert convert_zeta_to_depth1_basis(t(2), 2) == [-1, 1]

    @pytest.mark.parametrize("Q,s", [((0, 1, 1), 3), ((0, 2, -1, 5), 3), ((0, 0, 0, 0, 1), 4)])
    def test_round_trip(self, Q, s):
        poly = RationalPolynomial(Q)
        alpha = convert_zeta_to_depth1_basis(poly, s)
        recon = RationalPolynomial()
        for a, p in zip(alpha, depth1_basis(s)):
            recon = recon + p * a
        assert recon == poly

    def test_violations(self):
        with pytest.raises(BasisViolation):
            convert_zeta_to_depth1_basis(t(3), 2)
        with pytest.raises(BasisViolation):
            convert_zeta_to_depth1_basis(RationalPolynomial((1, 1)), 2)
