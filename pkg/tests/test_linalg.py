from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from relfit.exceptions import DimensionMismatch, NonBinaryEntry, RankDeficient, ZeroColumn
from relfit.linalg import (
    ModelMatrix,
    exact_rank,
    kernel_basis,
    nullspace,
    row_space_contains,
    validate_model_matrix,
)

from cases import INDEP3, BOUNDARY, KERNEL_RREF, KERNEL_ALT, INDEP_2X2

small_int_matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 7).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r
        )
    )
)
binary_matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 8).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(0, 1), min_size=c, max_size=c), min_size=r, max_size=r
        )
    )
)


def _valid_or_none(raw):
    try:
        return validate_model_matrix(raw)
    except (ZeroColumn, RankDeficient):
        return None


class TestValidateModelMatrix:
    def test_independence_matrix(self):
        A = validate_model_matrix(INDEP3)
        assert (A.J, A.num_cells) == (3, 7)
        assert isinstance(A, ModelMatrix)

    def test_smallest_matrix(self):
        A = validate_model_matrix([[1]])
        assert (A.J, A.num_cells) == (1, 1)

    def test_duplicated_row_is_rank_deficient(self):
        with pytest.raises(RankDeficient):
            validate_model_matrix(BOUNDARY + [BOUNDARY[2]])

    def test_non_binary_entry_reports_position(self):
        with pytest.raises(NonBinaryEntry) as info:
            validate_model_matrix([[1, 2], [0, 1]])
        assert info.value.details == {"row": 1, "column": 2}

    def test_zero_column(self):
        with pytest.raises(ZeroColumn):
            validate_model_matrix([[1, 0, 1], [1, 0, 0]])

    def test_ragged(self):
        with pytest.raises(DimensionMismatch):
            validate_model_matrix([[1, 0], [1]])

    def test_entries_are_read_only(self):
        A = validate_model_matrix(INDEP3)
        with pytest.raises(ValueError):
            A.entries[0, 0] = 0

    def test_labels_length_checked(self):
        with pytest.raises(DimensionMismatch):
            validate_model_matrix([[1, 1]], labels=["a"])


class TestExactRank:
    def test_examples(self):
        assert exact_rank(INDEP3) == 3
        assert exact_rank([[0, 0], [0, 0]]) == 0
        assert exact_rank(BOUNDARY) == 3

    def test_rational_entries(self):
        M = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), Fraction(1)]]
        assert exact_rank(M) == 1

    @given(small_int_matrices)
    @settings(max_examples=150, deadline=None)
    def test_agrees_with_sympy(self, M):
        assert exact_rank(M) == sympy.Matrix(M).rank()

    @given(small_int_matrices, st.randoms(use_true_random=False))
    @settings(max_examples=100, deadline=None)
    def test_row_permutation_and_scaling(self, M, rnd):
        perm = list(M)
        rnd.shuffle(perm)
        factors = [Fraction(rnd.choice([-3, -1, 2, 5]), rnd.choice([1, 7])) for _ in perm]
        scaled = [[f * v for v in row] for f, row in zip(factors, perm)]
        assert exact_rank(scaled) == exact_rank(M)


class TestKernelBasis:
    def test_independence_basis_matches_first_dual_matrix(self):
        D = kernel_basis(validate_model_matrix(INDEP3))
        assert D.K == 4
        assert [list(r) for r in D.rows] == KERNEL_RREF

    def test_same_row_space_as_both_dual_matrices(self):
        D = [list(r) for r in kernel_basis(validate_model_matrix(INDEP3)).rows]
        for other in (KERNEL_RREF, KERNEL_ALT):
            assert exact_rank(D + other) == exact_rank(D) == 4

    def test_identity_has_empty_kernel(self):
        D = kernel_basis(validate_model_matrix(np.eye(3, dtype=int).tolist()))
        assert D.K == 0 and D.rows == ()
        assert D.as_array().shape == (0, 3)

    def test_boundary_kernel_contains_hand_vectors(self):
        D = [list(r) for r in kernel_basis(validate_model_matrix(BOUNDARY)).rows]
        assert len(D) == 2
        for v in ([1, 0, 0, 0, -1], [-1, 1, 0, 1, 0]):
            assert exact_rank(D + [v]) == 2

    @given(binary_matrices)
    @settings(max_examples=150, deadline=None)
    def test_annihilates_and_has_full_rank(self, raw):
        A = _valid_or_none(raw)
        if A is None:
            return
        D = kernel_basis(A)
        assert D.K == A.num_cells - A.J
        for d in D.rows:
            assert all(sum(a * x for a, x in zip(row, d)) == 0 for row in raw)
            assert all(isinstance(x, int) for x in d)
            assert next(x for x in d if x != 0) > 0
        if D.K:
            assert exact_rank([list(r) for r in D.rows]) == D.K

    @given(small_int_matrices)
    @settings(max_examples=100, deadline=None)
    def test_nullspace_dimension_matches_sympy(self, M):
        assert len(nullspace(M)) == len(sympy.Matrix(M).nullspace())

    def test_deterministic(self):
        A = validate_model_matrix(INDEP3)
        assert kernel_basis(A) == kernel_basis(validate_model_matrix(INDEP3))


class TestRowSpace:
    def test_ones_not_in_independence_row_space(self):
        ok, k = row_space_contains(validate_model_matrix(INDEP3), [1] * 7)
        assert not ok and k is None

    def test_first_row(self):
        ok, k = row_space_contains(INDEP3, INDEP3[0])
        assert ok and k == [1, 0, 0]

    def test_ones_in_2x2_row_space(self):
        ok, k = row_space_contains(INDEP_2X2, [1, 1, 1, 1])
        assert ok
        assert k == [0, 0, 1]

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            row_space_contains(INDEP3, [1, 1])

    @given(binary_matrices, st.lists(st.integers(-3, 3), min_size=8, max_size=8))
    @settings(max_examples=150, deadline=None)
    def test_coefficients_substitute(self, raw, v):
        v = v[: len(raw[0])]
        ok, k = row_space_contains(raw, v)
        stacked = exact_rank(raw + [v])
        assert ok == (stacked == exact_rank(raw))
        if ok:
            combo = [sum(k[j] * raw[j][i] for j in range(len(raw))) for i in range(len(v))]
            assert combo == v
