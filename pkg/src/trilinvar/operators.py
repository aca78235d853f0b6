"""Raising operators T^(l)_m of sl3 + sl3 + sl3 on monomials and polynomials.

``T^(l)_m`` lowers the level-(m+1) index of one variable along direction
``l`` to level m; on a monomial it acts as a derivation, so the image of
``x^E`` carries the lowered exponent as its multiplicity.
"""

import numpy as np
import scipy.sparse as sp

from .monomials import (
    NVARS,
    OPERATORS,
    DegreeBasis,
    _check_op,
    _raise_positions,
    raise_images,
)
from .polynomial import Polynomial

DEFAULT_PRIME = 101
DEFAULT_BLOCK_ROWS = 639


def apply_raising(op, E):
    """Terms ``[(coefficient, image), ...]`` of ``T^(l)_m`` applied to ``x^E``."""
    ell, m = _check_op(op)
    e = [int(v) for v in np.asarray(E).reshape(NVARS)]
    out = []
    for lo, hi in _raise_positions(ell, m):
        if e[hi] > 0:
            f = list(e)
            f[hi] -= 1
            f[lo] += 1
            out.append((e[hi], tuple(f)))
    return out


def apply_raising_poly(op, p):
    """Exact image of the polynomial ``p`` under ``T^(l)_m``."""
    if p.is_zero():
        return Polynomial()
    src, mult, imgs = raise_images(p.exps, op)
    coeffs = p.coeffs[src] * mult.astype(object)
    return Polynomial(imgs, coeffs)


def annihilated(p):
    """``{op: image}`` for each of the six raising operators."""
    return {op: apply_raising_poly(op, p) for op in OPERATORS}


def _basis(N_or_basis):
    if isinstance(N_or_basis, DegreeBasis):
        return N_or_basis
    return DegreeBasis(N_or_basis)


def build_operator_matrix(N, op, modulus=None):
    """Sparse matrix of ``T^(l)_m`` from weight zero to weight ``OMEGA[op]``.

    Column ``c`` is the c-th weight-zero monomial, row ``r`` the r-th monomial
    of the higher-weight basis.  Entries are integers, reduced into
    ``[0, modulus)`` when a modulus is given.  ``N`` may be a degree or a
    prebuilt :class:`DegreeBasis`.
    """
    basis = _basis(N)
    op = _check_op(op)
    W = basis.weight_zero
    src, mult, imgs = raise_images(W, op)
    rows = basis.index(imgs, op)
    shape = (len(basis.higher(op)), len(W))
    M = sp.coo_matrix((mult, (rows, src)), shape=shape, dtype=np.int64).tocsr()
    M.sum_duplicates()
    if modulus is not None:
        M.data %= modulus
        M.eliminate_zeros()
    return M


def orbit_indicator(decomposition, kind="symmetric", columns=None):
    """Sparse ``(#weight-zero, #orbits)`` matrix expanding orbit coefficients.

    ``kind="alternating"`` uses the normalised alternating signs instead of
    ones; ``columns`` restricts to a subset of orbits.
    """
    labels = decomposition.labels
    n = len(labels)
    if kind == "symmetric":
        vals = np.ones(n, dtype=np.int64)
    elif kind == "alternating":
        vals = decomposition.signs
    else:
        raise ValueError(f"unknown orbit-sum kind {kind!r}")
    P = sp.coo_matrix((vals, (np.arange(n), labels)), shape=(n, len(decomposition)), dtype=np.int64).tocsc()
    P.eliminate_zeros()
    if columns is not None:
        P = P[:, np.asarray(columns)]
    return P.tocsr()


def restricted_operator_matrix(basis, op, indicator):
    """``T^(l)_m`` applied to each orbit sum: sparse ``(#higher, #columns)`` int matrix."""
    return (build_operator_matrix(basis, op) @ indicator).tocsr()


def build_restricted_matrix(basis, decomposition, kind="symmetric", columns=None,
                            block_rows=DEFAULT_BLOCK_ROWS, ops=OPERATORS):
    """Stream dense integer row blocks of the orbit-restricted operators.

    Yields ``(op, k, block)`` where ``block`` holds rows ``k*block_rows`` up to
    ``(k+1)*block_rows`` of ``T^op`` applied to the orbit sums (the final
    block of an operator may be shorter).
    """
    basis = _basis(basis)
    P = orbit_indicator(decomposition, kind, columns)
    for op in ops:
        R = restricted_operator_matrix(basis, op, P)
        nrows = R.shape[0]
        for k, start in enumerate(range(0, nrows, block_rows)):
            yield op, k, R[start:start + block_rows].toarray()


def dump_triplets(M):
    """Debug dump of a sparse or dense matrix as ``row col value`` lines."""
    C = sp.coo_matrix(M)
    order = np.lexsort((C.col, C.row))
    return [f"{int(C.row[i])} {int(C.col[i])} {int(C.data[i])}" for i in order]


def matrix_times_poly(basis, op, p):
    """Apply ``build_operator_matrix`` to the coefficient vector of a weight-zero
    supported polynomial; returns the image as a :class:`Polynomial`."""
    basis = _basis(basis)
    M = build_operator_matrix(basis, op)
    v = np.zeros(len(basis.weight_zero), dtype=object)
    if not p.is_zero():
        v[basis.index(p.exps)] = p.coeffs
    img = _sparse_obj_matvec(M, v)
    nz = np.flatnonzero(img != 0)
    return Polynomial(basis.higher(op)[nz], img[nz], _normalized=True)


def _sparse_obj_matvec(M, v):
    C = M.tocoo()
    out = np.zeros(M.shape[0], dtype=object)
    prod = C.data.astype(object) * v[C.col]
    np.add.at(out, C.row, prod)
    return out
