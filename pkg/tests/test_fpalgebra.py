from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupwl.errors import DimensionError, ParameterError
from groupwl.fpalgebra import (FpMatrix, check_odd_prime, column_space_equal, index_pairs, rank, rref,
                               row_kernel, wedge)


def span_size(M: np.ndarray, p: int) -> int:
    """Brute-force size of the row span."""
    rows = M.shape[0]
    return len({tuple((np.array(c) @ M) % p) for c in product(range(p), repeat=rows)})


@st.composite
def small_matrices(draw, max_rows=4, max_cols=5, primes=(3, 5)):
    p = draw(st.sampled_from(primes))
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    data = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    return FpMatrix(np.array(data).reshape(r, c), p)


def test_rejects_bad_moduli():
    for p in (2, 4, 9, 1, 0, -3):
        with pytest.raises(ParameterError):
            check_odd_prime(p)
    with pytest.raises(ParameterError):
        FpMatrix([[1]], 2)
    assert check_odd_prime(7) == 7


def test_entries_reduced():
    M = FpMatrix([[-1, 7], [3, 10]], 5)
    assert M.tolist() == [[4, 2], [3, 0]]
    with pytest.raises(ValueError):
        M.data[0, 0] = 1


def test_rank_examples():
    assert rank(FpMatrix.zeros(3, 4, 3)) == 0
    assert rank(FpMatrix.identity(3, 5)) == 3
    assert rank(FpMatrix([[1, 5, 1], [2, 1, 0]], 3)) == 2


@pytest.mark.parametrize("p,expected", [(3, [0, 1, 2]), (5, [1, 3, 4]), (7, [5, 5, 6]), (11, [2, 9, 10])])
def test_wedge_worked_example(p, expected):
    B2 = wedge(FpMatrix([[1, 5, 1], [2, 1, 0]], p))
    assert B2.tolist() == [expected]
    assert expected == [x % p for x in (-9, -2, -1)]
    assert list(B2.col_labels) == [(0, 1), (0, 2), (1, 2)]


def test_wedge_identity_and_errors():
    assert wedge(FpMatrix.identity(2, 3)).tolist() == [[1]]
    with pytest.raises(DimensionError):
        wedge(FpMatrix([[1, 2, 3]], 3))
    with pytest.raises(DimensionError):
        wedge(FpMatrix([[1], [2]], 3))


def test_wedge_of_rank_three_4x6():
    rng = np.random.default_rng(7)
    while True:
        M = FpMatrix(rng.integers(0, 3, (4, 6)), 3)
        if rank(M) == 3:
            break
    assert rank(wedge(M)) == 3


def test_wedge_entries_are_minors():
    rng = np.random.default_rng(1)
    M = rng.integers(0, 7, (4, 5))
    W = wedge(FpMatrix(M, 7))
    for r, (i, j) in enumerate(index_pairs(4)):
        for c, (k, l) in enumerate(index_pairs(5)):
            assert W.data[r, c] == (M[i, k] * M[j, l] - M[i, l] * M[j, k]) % 7


def test_column_space_examples():
    A = FpMatrix([[1, 2], [0, 1]], 3)
    assert column_space_equal(A, A)
    assert column_space_equal(FpMatrix.identity(2, 3), FpMatrix([[2, 0], [0, 2]], 3))
    assert not column_space_equal(FpMatrix([[1], [0]], 3), FpMatrix([[0], [1]], 3))
    with pytest.raises(DimensionError):
        column_space_equal(FpMatrix([[1]], 3), FpMatrix([[1], [0]], 3))


def test_row_kernel_examples():
    assert row_kernel(FpMatrix.identity(3, 5)).rows == 0
    K = row_kernel(FpMatrix([[1, 2, 0], [1, 2, 0]], 5))
    assert K.tolist() == [[1, 4]]


def test_kernel_dimension_of_random_wedges():
    rng = np.random.default_rng(3)
    for _ in range(20):
        B2 = wedge(FpMatrix(rng.integers(0, 3, (3, 7)), 3))
        assert row_kernel(B2).rows == comb(3, 2) - rank(B2)


@given(small_matrices())
def test_rank_matches_span_enumeration(M):
    assert M.p ** rank(M) == span_size(M.data, M.p)


@given(small_matrices())
def test_rank_invariant_under_permutations(M):
    rng = np.random.default_rng(M.rows * 31 + M.cols)
    P = FpMatrix(M.data[rng.permutation(M.rows)][:, rng.permutation(M.cols)], M.p)
    assert rank(P) == rank(M)


@given(small_matrices(max_rows=5, max_cols=6, primes=(3, 5, 7)))
def test_rank_of_wedge(M):
    if M.rows >= 2 and M.cols >= 2:
        assert rank(wedge(M)) == comb(rank(M), 2)


@given(small_matrices())
def test_kernel_annihilates_and_is_canonical(M):
    K = row_kernel(M)
    assert K.rows == M.rows - rank(M)
    assert not ((K.data @ M.data) % M.p).any()
    if K.rows:
        R, _ = rref(K)
        assert np.array_equal(R, K.data)


@given(small_matrices(), st.integers(0, 10 ** 6))
def test_kernel_same_for_column_equivalent_inputs(M, seed):
    rng = np.random.default_rng(seed)
    while True:
        U = rng.integers(0, M.p, (M.cols, M.cols))
        if rank(FpMatrix(U, M.p)) == M.cols:
            break
    assert row_kernel(FpMatrix(M.data @ U, M.p)) == row_kernel(M)


@given(small_matrices(), st.integers(0, 10 ** 6))
def test_rref_canonical_under_row_operations(M, seed):
    rng = np.random.default_rng(seed)
    while True:
        U = rng.integers(0, M.p, (M.rows, M.rows))
        if rank(FpMatrix(U, M.p)) == M.rows:
            break
    assert np.array_equal(rref(M)[0], rref(FpMatrix(U @ M.data, M.p))[0])


@given(small_matrices(max_cols=3), small_matrices(max_cols=3))
def test_column_space_equal_matches_span_sets(A, B):
    if A.rows != B.rows or A.p != B.p:
        return
    spanA = span_size(A.data.T, A.p)
    joint = span_size(np.hstack([A.data, B.data]).T, A.p)
    spanB = span_size(B.data.T, A.p)
    assert column_space_equal(A, B) == (spanA == spanB == joint)
