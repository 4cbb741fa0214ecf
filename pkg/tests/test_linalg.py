import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from qmzv.bibracket import BiBracketIndex, IndexFamily, QAnalogueSpec, bibracket_batch, enumerate_indices, zeta_q_series
from qmzv.errors import MissingEntry
from qmzv.linalg import (
    FIL_LOWER_BOUND,
    CoefficientMatrix,
    DimTable,
    Echelon,
    TruncationTooSmall,
    auto_truncation,
    fil_table,
    gr_table,
    membership,
    rank,
    rational_rank,
    series_matrix,
)
from qmzv.qseries import DEFAULT_PRIME, SECOND_PRIME, RationalPolynomial, RingSpec

P = DEFAULT_PRIME
FP = RingSpec.prime_field(P)
B = BiBracketIndex


def sympy_rank_mod_p(rows, p):
    M = sp.Matrix(rows)
    # rank over F_p via sympy's GF(p) domain
    from sympy.polys.matrices import DomainMatrix

    dm = DomainMatrix.from_Matrix(M).convert_to(sp.GF(p))
    return dm.rank()


class TestEchelon:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32))
    def test_rank_matches_sympy(self, n, m, seed):
        rng = np.random.default_rng(seed)
        # low-rank products make dependent rows likely
        A = rng.integers(0, 5, size=(n, 3)) @ rng.integers(0, 5, size=(3, m))
        ech = Echelon(m, P)
        ech.add_rows(A % P)
        assert ech.rank == sympy_rank_mod_p(A.tolist(), P)

    def test_independence_flags_are_greedy(self):
        rows = np.array([[1, 0, 0], [2, 0, 0], [0, 1, 0], [1, 1, 0]])
        ech = Echelon(3, P)
        assert ech.add_rows(rows) == [True, False, True, False]

    def test_large_entries_do_not_overflow(self):
        rng = np.random.default_rng(1)
        A = rng.integers(0, P, size=(30, 40))
        ech = Echelon(40, P)
        ech.add_rows(A)
        assert ech.rank == sympy_rank_mod_p(A.tolist(), P)

    def test_reduce_tracks_coordinates(self):
        rng = np.random.default_rng(2)
        basis = rng.integers(0, P, size=(4, 9))
        coeffs = rng.integers(0, P, size=4)
        target = np.array([int(x) % P for x in (np.array(coeffs, dtype=object) @ np.array(basis, dtype=object))])
        mat = CoefficientMatrix(FP, basis, tuple(range(4)))
        coords = membership(target, mat)
        assert coords is not None
        assert [int(x) for x in coords] == [int(c) for c in coeffs]


class TestRank:
    def test_table_entry(self):
        idx = enumerate_indices(2, 1)
        assert rank(series_matrix(idx, 100, P)).rank == 3

    def test_constant_and_bracket(self):
        assert rank(series_matrix([B(), B.bracket(1)], 50, P)).rank == 2

    def test_swap_pair(self):
        profile = rank(series_matrix([B((1,), (1,)), B.bracket(2)], 50, P))
        assert profile.rank == 1
        assert profile.pivot_rows == (B((1,), (1,)),)

    def test_invariant_under_permutation_and_scaling(self):
        m = series_matrix(enumerate_indices(4, 4), 80, P)
        rng = np.random.default_rng(0)
        perm = rng.permutation(m.n_rows)
        scale = rng.integers(1, P, size=m.n_rows)
        rows = (m.rows[perm] * scale[perm, None].astype(object) % P).astype(np.int64)
        other = CoefficientMatrix(FP, rows, tuple(m.tags[i] for i in perm))
        assert rank(other).rank == rank(m).rank

    def test_monotone_in_truncation(self):
        idx = enumerate_indices(5, 5)
        ranks = [rank(series_matrix(idx, N, P)).rank for N in (10, 20, 40, 80, 160)]
        assert ranks == sorted(ranks)

    def test_rational_rank_agrees_on_small_family(self):
        idx = enumerate_indices(4, 4)
        exact = bibracket_batch(idx, 60, RingSpec.rational())
        assert rational_rank([exact[i].tolist() for i in idx]) == rank(series_matrix(idx, 60, P)).rank


class TestMembership:
    def test_swap_identity(self):
        basis = series_matrix(enumerate_indices(2, 2, IndexFamily.BRACKETS), 60, P)
        target = bibracket_batch([B((1,), (1,))], 60, FP)[B((1,), (1,))]
        coords = membership(target, basis)
        assert coords is not None
        assert dict(zip(basis.tags, coords.tolist())) == {B(): 0, B.bracket(1): 0, B.bracket(2): 1, B.bracket(1, 1): 0}

    def test_fildefect_coordinates(self):
        t = RationalPolynomial.monomial
        specs = [QAnalogueSpec((1, 1), (t(1), t(1))), QAnalogueSpec((1, 1, 1), (t(1), t(1), RationalPolynomial((1, -1))))]
        rows = np.stack([zeta_q_series(s, 80, FP).coeffs for s in specs])
        basis = CoefficientMatrix(FP, rows, ("zeta(1,1)", "zeta(1,1,1)"))
        target = bibracket_batch([B((1, 1), (0, 1))], 80, FP)[B((1, 1), (0, 1))]
        assert membership(target, basis).tolist() == [1, 1]

    def test_fresh_coefficient_is_outside(self):
        basis = series_matrix(enumerate_indices(3, 3), 60, P)
        target = np.zeros(61, dtype=np.int64)
        target[59] = 1
        assert membership(target, basis) is None


class TestFilTable:
    def test_row_four(self):
        fil = fil_table(4, 4)
        assert fil.row(4) == [7, 12, 14, 15]
        assert fil[(1, 1)] == 2
        assert fil.meaning == FIL_LOWER_BOUND

    def test_boundaries(self):
        fil = fil_table(3, 3)
        assert all(fil[(k, 0)] == 1 for k in range(4))
        assert all(fil[(0, l)] == 1 for l in range(4))

    def test_monotone(self):
        fil = fil_table(5, 5)
        for k in range(6):
            for l in range(6):
                if k:
                    assert fil[(k, l)] >= fil[(k - 1, l)]
                if l:
                    assert fil[(k, l)] >= fil[(k, l - 1)]

    def test_family_inclusion(self):
        tables = [fil_table(5, 5, fam, N=150) for fam in (IndexFamily.BRACKETS123, IndexFamily.BRACKETS, IndexFamily.ALL)]
        for key in tables[0].entries:
            assert tables[0][key] <= tables[1][key] <= tables[2][key]

    def test_auto_truncation_records_choice(self):
        fil = fil_table(4, 4)
        assert fil.meta["N_rule"] == "auto" and fil.meta["N"] >= 2 * fil[(4, 4)]
        assert fil.meta["primes"] == [DEFAULT_PRIME, SECOND_PRIME]

    def test_row_rule(self):
        fil = fil_table(3, 3, N="rows")
        assert fil.meta["N"] == auto_truncation(fil.meta["rows"]) == 200

    def test_truncation_warning(self):
        with pytest.warns(TruncationTooSmall):
            fil = fil_table(4, 4, N=20)
        assert "warning" in fil.meta

    def test_no_warning_when_large(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            fil_table(3, 3, N=100)

    def test_stability_and_workers(self):
        a = fil_table(5, 5, N=150, stability_offset=100)
        assert a.meta["stability"]["stable"]
        assert fil_table(5, 5, N=150, workers=4) == a

    def test_single_prime(self):
        assert fil_table(3, 3, primes=(SECOND_PRIME,)) == fil_table(3, 3)


class TestGrTable:
    def test_from_row_values(self):
        fil = fil_table(6, 6)
        gr = gr_table(fil)
        assert gr[(6, 2)] == 8
        assert gr[(4, 1)] == 2
        assert gr[(0, 0)] == 1

    def test_constant_table(self):
        fil = DimTable({(k, l): 1 for k in range(5) for l in range(5)}, FIL_LOWER_BOUND)
        gr = gr_table(fil)
        assert all(gr[(k, l)] == 0 for k in range(1, 5) for l in range(1, 5))

    def test_cumulative_sum_reproduces_fil(self):
        fil = fil_table(6, 6)
        gr = gr_table(fil)
        for k in range(7):
            for l in range(7):
                assert sum(gr[(a, b)] for a in range(k + 1) for b in range(l + 1)) == fil[(k, l)]

    def test_missing_entry(self):
        fil = DimTable({(1, 1): 2, (2, 2): 4}, FIL_LOWER_BOUND)
        with pytest.raises(MissingEntry):
            gr_table(fil)


class TestDimTable:
    def test_round_trip(self):
        fil = fil_table(3, 3)
        assert DimTable.from_dict(fil.to_dict()) == fil

    def test_missing(self):
        with pytest.raises(MissingEntry):
            DimTable({}, FIL_LOWER_BOUND)[(1, 1)]
