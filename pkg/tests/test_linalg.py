from fractions import Fraction
from itertools import product

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from trilinvar.linalg import (
    IntReducer,
    ModReducer,
    canonical_kernel_vectors,
    gauss_lagrange,
    hnf,
    hnf_rank,
    integer_nullspace,
    nullspace_mod,
    primitive,
    rref_mod,
    sparse_nullspace_mod,
    symmetric_lift,
)
from trilinvar.monomials import InvalidInput


# ---------------------------------------------------------------------------
# oracles

def rational_rank(M):
    """Bareiss fraction-free elimination over Z, i.e. the rank over Q."""
    A = [[int(x) for x in row] for row in np.asarray(M)]
    if not A:
        return 0
    m, n = len(A), len(A[0])
    rank, prev = 0, 1
    for c in range(n):
        piv = next((r for r in range(rank, m) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(rank + 1, m):
            for k in range(c + 1, n):
                A[r][k] = (A[r][k] * A[rank][c] - A[rank][k] * A[r][c]) // prev
            A[r][c] = 0
        prev = A[rank][c]
        rank += 1
    return rank


def rational_rref(M):
    A = [[Fraction(int(x)) for x in row] for row in np.asarray(M)]
    m = len(A)
    n = len(A[0]) if m else 0
    r = 0
    piv = []
    for c in range(n):
        k = next((i for i in range(r, m) if A[i][c] != 0), None)
        if k is None:
            continue
        A[r], A[k] = A[k], A[r]
        A[r] = [x / A[r][c] for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        piv.append(c)
        r += 1
    return A[:r], piv


def exact_det(U):
    A = [[Fraction(int(x)) for x in row] for row in np.asarray(U)]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        k = next((i for i in range(c, n) if A[i][c] != 0), None)
        if k is None:
            return 0
        if k != c:
            A[c], A[k] = A[k], A[c]
            det = -det
        det *= A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return det


def is_hnf(H):
    H = np.asarray(H, dtype=object)
    last = -1
    seen_zero = False
    for row in H:
        nz = [j for j, x in enumerate(row) if x != 0]
        if not nz:
            seen_zero = True
            continue
        if seen_zero:
            return False
        c = nz[0]
        if c <= last or row[c] <= 0:
            return False
        last = c
    # entries above each pivot reduced into [0, pivot)
    for r, row in enumerate(H):
        nz = [j for j, x in enumerate(row) if x != 0]
        if not nz:
            continue
        c = nz[0]
        for i in range(r):
            if not 0 <= H[i][c] < row[c]:
                return False
    return True


def random_unimodular(rng, n, steps=12):
    U = np.eye(n, dtype=object)
    for _ in range(steps if n > 1 else 0):
        i, j = rng.choice(n, 2, replace=False)
        U[i] = U[i] + int(rng.integers(-3, 4)) * U[j]
    return U[rng.permutation(n)]


# ---------------------------------------------------------------------------
# mod p

def test_rref_small_example():
    rank, R, piv = rref_mod([[1, 2], [2, 4]], 101)
    assert rank == 1 and piv == [0]
    assert R.tolist() == [[1, 2]]
    assert nullspace_mod([[1, 2], [2, 4]], 101)[0].tolist() == [99, 1]


def test_rref_identity_and_zero():
    rank, R, piv = rref_mod(np.eye(4, dtype=int), 7)
    assert rank == 4 and piv == [0, 1, 2, 3]
    rank, R, piv = rref_mod(np.zeros((3, 5), dtype=int), 7)
    assert rank == 0
    assert len(nullspace_mod(np.zeros((3, 5), dtype=int), 7)) == 5


def test_bad_modulus():
    with pytest.raises(InvalidInput):
        rref_mod([[1]], 100)
    with pytest.raises(InvalidInput):
        ModReducer(3, 2)


def test_rank_deficiency_mod_small_prime():
    # rank 2 over Q, rank 1 mod 3
    M = [[1, 1], [1, 4]]
    assert rref_mod(M, 3)[0] == 1
    assert rational_rank(M) == 2


def test_symmetric_lift():
    assert symmetric_lift([0, 1, 50, 51, 100], 101).tolist() == [0, 1, 50, -50, -1]


def test_incremental_equals_batch():
    rng = np.random.default_rng(3)
    M = rng.integers(-5, 6, (40, 25)) * (rng.random((40, 25)) < 0.3)
    batch = rref_mod(M, 101)
    red = ModReducer(25, 101, chunk=7)
    for s in range(0, 40, 9):
        red.add(M[s:s + 9])
    assert red.rank == batch[0]
    assert (red.R == batch[1]).all()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rank_mod_p_at_most_rational_rank(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 9, 2)
    M = rng.integers(-6, 7, (m, n)) * (rng.random((m, n)) < 0.6)
    p = int(rng.choice([3, 5, 7, 101]))
    rank_p = rref_mod(M, p)[0]
    assert rank_p <= rational_rank(M)
    # and every mod-p kernel vector is a kernel vector
    for v in nullspace_mod(M, p):
        assert not (M @ v % p).any()


def test_rref_matches_rational_rref_when_p_is_large():
    rng = np.random.default_rng(11)
    M = rng.integers(-3, 4, (6, 9))
    R, piv = rational_rref(M)
    p = 1000003
    rank, Rp, pivp = rref_mod(M, p)
    assert pivp == piv
    for row_q, row_p in zip(R, Rp):
        for x, y in zip(row_q, row_p):
            assert (x.numerator * pow(x.denominator, -1, p) - int(y)) % p == 0


def test_sparse_nullspace_equals_dense():
    rng = np.random.default_rng(5)
    A = rng.integers(-2, 3, (30, 60)) * (rng.random((30, 60)) < 0.08)
    B = rng.integers(-2, 3, (30, 60)) * (rng.random((30, 60)) < 0.08)
    K = sparse_nullspace_mod([sp.csr_matrix(A), sp.csr_matrix(B)], 60, 101)
    vecs = canonical_kernel_vectors(K, 101)
    dense = nullspace_mod(np.vstack([A, B]), 101)
    assert len(vecs) == len(dense)
    for v, w in zip(vecs, dense):
        assert (v == w).all()


# ---------------------------------------------------------------------------
# integers

def test_hnf_documented_example():
    M = np.array([[2, 4], [6, 8]], dtype=object)
    H, U = hnf(M)
    assert H.tolist() == [[2, 0], [0, 4]]
    assert abs(exact_det(U)) == 1
    assert (U.dot(M) == H).all()
    # the lattice index is preserved: |det M| = |det H| = 8
    assert abs(exact_det(M)) == abs(exact_det(H)) == 8


def test_hnf_identity():
    H, U = hnf(np.eye(3, dtype=int))
    assert H.tolist() == np.eye(3, dtype=int).tolist()
    assert U.tolist() == np.eye(3, dtype=int).tolist()


def test_hnf_matches_elementary_row_oracle():
    H, _ = hnf([[2, 4], [3, 1]])
    # rows (2,4),(3,1): (3,1)-(2,4) = (1,-3); (2,4)-2(1,-3) = (0,10); reduce -3 mod 10
    assert H.tolist() == [[1, 7], [0, 10]]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hnf_properties(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 7, 2)
    M = np.array(rng.integers(-9, 10, (m, n)), dtype=object)
    H, U = hnf(M)
    assert (U.dot(M) == H).all()
    assert abs(exact_det(U)) == 1
    assert is_hnf(H)
    assert hnf_rank(H) == rational_rank(M)
    # uniqueness: the same lattice presented differently has the same HNF
    V = random_unimodular(rng, m)
    H2, _ = hnf(V.dot(M))
    assert (H2 == H).all()
    # rows below the rank span the left kernel
    for row in U[hnf_rank(H):]:
        assert not any(row.dot(M))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_int_reducer_matches_hnf(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 12), rng.integers(1, 7)
    M = np.array(rng.integers(-4, 5, (m, n)), dtype=object)
    red = IntReducer(n)
    for s in range(0, m, 3):
        red.add(M[s:s + 3])
    H, _ = hnf(M)
    r = hnf_rank(H)
    assert red.rank == r
    assert (red.matrix() == H[:r]).all()


def test_int_reducer_skips_duplicates():
    red = IntReducer(3)
    red.add([[2, 0, 1], [2, 0, 1], [0, 0, 0]])
    assert red.rank == 1
    red.add([[3, 0, 0]])
    assert red.matrix().tolist() == [[1, 0, -1], [0, 0, 3]] or is_hnf(red.matrix())


def test_integer_nullspace():
    M = [[1, 2, 3], [4, 5, 6]]
    K = integer_nullspace(M)
    assert len(K) == 1
    assert primitive(K[0]) in ([1, -2, 1], [-1, 2, -1])


def test_integer_nullspace_is_saturated():
    # kernel over Q is spanned by (2, -1); the lattice must not be 2*(2,-1)
    K = integer_nullspace([[2, 4]])
    assert [abs(int(x)) for x in K[0]] == [2, 1]


# ---------------------------------------------------------------------------
# Gauss-Lagrange

def norm2(v):
    return sum(int(x) * int(x) for x in v)


def test_gauss_lagrange_documented_example():
    u, v = gauss_lagrange([3, 4], [4, 5])
    assert sorted([tuple(map(abs, u)), tuple(map(abs, v))]) == [(0, 1), (1, 0)]


def test_gauss_lagrange_reduced_input_unchanged():
    u, v = gauss_lagrange([2, 0], [0, 3])
    assert (u, v) == ([2, 0], [0, 3])


def test_gauss_lagrange_dependent():
    with pytest.raises(InvalidInput):
        gauss_lagrange([1, 2], [2, 4])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-30, 30), min_size=4, max_size=4))
def test_gauss_lagrange_lagrange_conditions(coords):
    a, b, c, d = coords
    if a * d - b * c == 0:
        return
    u, v = gauss_lagrange([a, b], [c, d])
    # same lattice: the change of basis is unimodular
    assert abs(u[0] * v[1] - u[1] * v[0]) == abs(a * d - b * c)
    assert norm2(u) <= norm2(v)
    assert all(norm2(v) <= norm2([y + k * x for x, y in zip(u, v)]) for k in range(-5, 6))
    # u is a shortest nonzero vector: brute-force box search
    best = min(norm2([i * a + j * c, i * b + j * d])
               for i, j in product(range(-12, 13), repeat=2) if (i, j) != (0, 0))
    assert norm2(u) == best


def test_primitive():
    assert primitive([4, -6, 8]) == [2, -3, 4]
    assert primitive([0, 0]) == [0, 0]
