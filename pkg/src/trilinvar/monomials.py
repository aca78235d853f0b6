"""Exponent arrays of monomials in the 27 variables x_ijk.

An exponent array ``E = (e_ijk)`` is stored flattened: position
``9*(i-1) + 3*(j-1) + (k-1)`` holds ``e_ijk`` (1-based subscripts), so the
flattened list reads ``e111, e112, e113, e121, ..., e333``.  Monomials are
totally ordered by comparing flattenings lexicographically.

Collections of monomials are ``(n, 27)`` uint8 numpy arrays; single
monomials may be any length-27 sequence.
"""

from functools import lru_cache
from math import comb

import numpy as np

NVARS = 27

OPERATORS = ((1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2))

# weights of the six raising operators, in (w11, w12, w21, w22, w31, w32) order
OMEGA = {
    (1, 1): (2, -1, 0, 0, 0, 0),
    (1, 2): (-1, 2, 0, 0, 0, 0),
    (2, 1): (0, 0, 2, -1, 0, 0),
    (2, 2): (0, 0, -1, 2, 0, 0),
    (3, 1): (0, 0, 0, 0, 2, -1),
    (3, 2): (0, 0, 0, 0, -1, 2),
}


class InvalidInput(ValueError):
    pass


class MonomialNotFound(LookupError):
    """A monomial expected in a basis is missing (a basis-generation bug)."""


def flat_index(i, j, k):
    """Flattened position of the 1-based subscript ``(i, j, k)``."""
    return 9 * (i - 1) + 3 * (j - 1) + (k - 1)


def flatten(E):
    """Flatten a nested ``E[i][j][k]`` array (0-based storage) to a 27-tuple."""
    arr = np.asarray(E)
    if arr.shape != (3, 3, 3):
        raise InvalidInput(f"expected a 3x3x3 exponent array, got shape {arr.shape}")
    if (arr < 0).any():
        raise InvalidInput("exponents must be non-negative")
    return tuple(int(v) for v in arr.reshape(NVARS))


def unflatten(L):
    """Inverse of :func:`flatten`: a 27-list becomes a 3x3x3 int array."""
    arr = np.asarray(L)
    if arr.shape != (NVARS,):
        raise InvalidInput(f"expected 27 exponents, got shape {arr.shape}")
    if (arr < 0).any():
        raise InvalidInput("exponents must be non-negative")
    return arr.astype(np.int64).reshape(3, 3, 3)


def as_monomials(E):
    """Coerce one monomial or a stack of monomials to an ``(n, 27)`` uint8 array."""
    arr = np.asarray(E)
    if arr.ndim == 1:
        arr = arr[None, :]
    elif arr.ndim == 4:
        arr = arr.reshape(len(arr), NVARS)
    if arr.ndim != 2 or arr.shape[1] != NVARS:
        raise InvalidInput(f"expected exponent rows of length 27, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise InvalidInput("exponents must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def compare(E, F):
    """Return -1, 0 or 1 as ``E`` is less than, equal to or greater than ``F``."""
    a = tuple(int(v) for v in np.asarray(E).reshape(-1))
    b = tuple(int(v) for v in np.asarray(F).reshape(-1))
    return (a > b) - (a < b)


def degree(E):
    return int(np.asarray(E, dtype=np.int64).sum())


def weight(E):
    """The six Cartan eigenvalues ``(w11, w12, w21, w22, w31, w32)`` of ``M(E)``."""
    e = np.asarray(E, dtype=np.int64).reshape(3, 3, 3)
    s1 = e.sum(axis=(1, 2))
    s2 = e.sum(axis=(0, 2))
    s3 = e.sum(axis=(0, 1))
    return tuple(
        int(v)
        for v in (s1[0] - s1[1], s1[1] - s1[2], s2[0] - s2[1], s2[1] - s2[2], s3[0] - s3[1], s3[1] - s3[2])
    )


def weights(A):
    """Row-wise :func:`weight` for an ``(n, 27)`` array; returns ``(n, 6)`` int64."""
    e = as_monomials(A).astype(np.int64).reshape(-1, 3, 3, 3)
    s1 = e.sum(axis=(2, 3))
    s2 = e.sum(axis=(1, 3))
    s3 = e.sum(axis=(1, 2))
    return np.stack(
        [s1[:, 0] - s1[:, 1], s1[:, 1] - s1[:, 2],
         s2[:, 0] - s2[:, 1], s2[:, 1] - s2[:, 2],
         s3[:, 0] - s3[:, 1], s3[:, 1] - s3[:, 2]],
        axis=1,
    )


@lru_cache(maxsize=None)
def _rank_table(N):
    # T[pos, rem, e] counts degree-N monomials sharing a prefix whose entry at
    # pos is < e, given `rem` degree left to place from pos onward.
    T = np.zeros((NVARS, N + 1, N + 1), dtype=np.int64)
    for pos in range(NVARS):
        tail = NVARS - pos - 1

        def ways(s):
            if tail == 0:
                return 1 if s == 0 else 0
            return comb(s + tail - 1, tail - 1)

        for rem in range(N + 1):
            acc = 0
            for e in range(rem + 1):
                T[pos, rem, e] = acc
                acc += ways(rem - e)
    return T


def monomial_keys(A, N=None):
    """Lexicographic rank of each degree-``N`` monomial among all degree-``N`` ones.

    The keys are int64 and strictly monotone in the monomial order, so
    ``np.searchsorted`` on keys is binary search on monomials.
    """
    A = as_monomials(A)
    if N is None:
        N = int(A[0].sum()) if len(A) else 0
    if comb(N + NVARS - 1, NVARS - 1) >= 2**63:
        raise InvalidInput(f"degree {N} too large for int64 monomial keys")
    e = A.astype(np.int64)
    rem = N - np.cumsum(e, axis=1) + e
    if len(A) and (rem[:, -1] != e[:, -1]).any():
        raise InvalidInput(f"monomials are not all of degree {N}")
    T = _rank_table(N)
    return T[np.arange(NVARS), rem, e].sum(axis=1)


def lex_sort(A):
    """Sort rows lexicographically and drop duplicates."""
    A = as_monomials(A)
    if len(A) == 0:
        return A
    order = np.lexsort(A.T[::-1])
    A = A[order]
    keep = np.ones(len(A), dtype=bool)
    keep[1:] = (A[1:] != A[:-1]).any(axis=1)
    return A[keep]


@lru_cache(maxsize=None)
def _compositions(n, parts):
    """All compositions of n into `parts` non-negative parts, lexicographically."""
    if parts == 1:
        return np.array([[n]], dtype=np.uint8)
    rows = []
    for first in range(n + 1):
        rest = _compositions(n - first, parts - 1)
        head = np.full((len(rest), 1), first, dtype=np.uint8)
        rows.append(np.hstack([head, rest]))
    return np.vstack(rows)


@lru_cache(maxsize=None)
def _weight_zero(N):
    if N % 3:
        return np.zeros((0, NVARS), dtype=np.uint8)
    n = N // 3
    S = _compositions(n, 9)  # candidate horizontal slices, lex order
    sq = S.reshape(-1, 3, 3).astype(np.int64)
    rows, cols = sq.sum(axis=2), sq.sum(axis=1)
    base = n + 1
    radix = base ** np.arange(6)
    sig = np.hstack([rows, cols]) @ radix

    # bucket slices by (row sums, col sums) signature, keeping lex order inside buckets
    order = np.argsort(sig, kind="stable")
    sorted_sig = sig[order]
    uniq, starts, counts = np.unique(sorted_sig, return_index=True, return_counts=True)

    parts = []
    for a in range(len(S)):
        r12 = rows[a] + rows
        c12 = cols[a] + cols
        need = np.hstack([n - r12, n - c12])
        ok = (need >= 0).all(axis=1)
        need_sig = need @ radix
        pos = np.searchsorted(uniq, need_sig)
        pos = np.minimum(pos, len(uniq) - 1)
        ok &= uniq[pos] == need_sig
        b_idx = np.nonzero(ok)[0]
        if len(b_idx) == 0:
            continue
        cnt = counts[pos[b_idx]]
        b_rep = np.repeat(b_idx, cnt)
        st = np.repeat(starts[pos[b_idx]], cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        c_idx = order[st + offs]
        block = np.empty((len(b_rep), NVARS), dtype=np.uint8)
        block[:, :9] = S[a]
        block[:, 9:18] = S[b_rep]
        block[:, 18:] = S[c_idx]
        parts.append(block)
    out = lex_sort(np.vstack(parts)) if parts else np.zeros((0, NVARS), dtype=np.uint8)
    out.setflags(write=False)
    return out


def generate_weight_zero(N):
    """All equal-parallel-slice exponent arrays of degree ``N``, sorted.

    Empty when ``N`` is not a multiple of 3.  The returned array is shared
    and read-only.
    """
    if N < 0:
        raise InvalidInput("degree must be non-negative")
    return _weight_zero(int(N))


def raise_images(A, op):
    """Vectorised raising step.

    For every row of ``A`` and every position where the operator can act,
    returns ``(src, coeff, images)``: the source row index, the multiplicity
    (the exponent being lowered) and the raised exponent array.
    """
    ell, m = _check_op(op)
    A = as_monomials(A)
    pairs = _raise_positions(ell, m)
    srcs, coeffs, imgs = [], [], []
    for lo, hi in pairs:
        # hi is the level-(m+1) cell, lo the level-m cell
        sel = np.nonzero(A[:, hi])[0]
        if len(sel) == 0:
            continue
        img = A[sel].copy()
        c = img[:, hi].astype(np.int64)
        img[:, hi] -= 1
        img[:, lo] += 1
        srcs.append(sel)
        coeffs.append(c)
        imgs.append(img)
    if not srcs:
        return (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64),
                np.zeros((0, NVARS), dtype=np.uint8))
    return np.concatenate(srcs), np.concatenate(coeffs), np.vstack(imgs)


def _check_op(op):
    try:
        ell, m = op
    except (TypeError, ValueError):
        raise InvalidInput(f"bad operator id {op!r}") from None
    if (ell, m) not in OMEGA:
        raise InvalidInput(f"operator must have l in 1..3 and m in 1..2, got {op!r}")
    return int(ell), int(m)


@lru_cache(maxsize=None)
def _raise_positions(ell, m):
    pairs = []
    for a in range(1, 4):
        for b in range(1, 4):
            if ell == 1:
                lo, hi = flat_index(m, a, b), flat_index(m + 1, a, b)
            elif ell == 2:
                lo, hi = flat_index(a, m, b), flat_index(a, m + 1, b)
            else:
                lo, hi = flat_index(a, b, m), flat_index(a, b, m + 1)
            pairs.append((lo, hi))
    return tuple(pairs)


def _transpose_directions(A, ell):
    """Swap direction 1 with direction ``ell`` in every row of ``A``."""
    cube = A.reshape(-1, 3, 3, 3)
    if ell == 2:
        cube = cube.transpose(0, 2, 1, 3)
    elif ell == 3:
        cube = cube.transpose(0, 3, 2, 1)
    return np.ascontiguousarray(cube).reshape(-1, NVARS)


@lru_cache(maxsize=None)
def _higher_weight(N, ell, m):
    if ell == 1:
        _, _, imgs = raise_images(generate_weight_zero(N), (1, m))
        out = lex_sort(imgs)
    else:
        out = lex_sort(_transpose_directions(_higher_weight(N, 1, m), ell))
    out.setflags(write=False)
    return out


def generate_higher_weight(N, ell, m):
    """Sorted monomials of weight ``OMEGA[(ell, m)]`` reachable from weight zero."""
    ell, m = _check_op((ell, m))
    if N < 0:
        raise InvalidInput("degree must be non-negative")
    return _higher_weight(int(N), ell, m)


def monomial_index(E, basis, keys=None):
    """0-based position of ``E`` in the sorted ``basis`` (binary search).

    Raises :class:`MonomialNotFound` if ``E`` is absent.
    """
    E = as_monomials(E)
    idx = monomial_indices(E, basis, keys)
    return int(idx[0])


def monomial_indices(A, basis, keys=None):
    """Vectorised :func:`monomial_index` for every row of ``A``."""
    A = as_monomials(A)
    if len(A) == 0:
        return np.zeros(0, dtype=np.int64)
    if len(basis) == 0:
        raise MonomialNotFound("empty basis")
    N = int(basis[0].sum())
    if keys is None:
        keys = monomial_keys(basis, N)
    degs = A.sum(axis=1, dtype=np.int64)
    if (degs != N).any():
        raise MonomialNotFound(f"monomial of wrong degree for a degree-{N} basis")
    q = monomial_keys(A, N)
    pos = np.searchsorted(keys, q)
    bad = (pos >= len(keys)) | (keys[np.minimum(pos, len(keys) - 1)] != q)
    if bad.any():
        missing = A[np.nonzero(bad)[0][0]]
        raise MonomialNotFound(f"monomial {missing.tolist()} not in basis")
    return pos


class DegreeBasis:
    """Weight-zero and higher-weight bases for one degree, with cached search keys."""

    def __init__(self, N):
        self.N = int(N)
        self.weight_zero = generate_weight_zero(self.N)
        self._higher = {}
        self._keys = {}

    def higher(self, op):
        op = _check_op(op)
        if op not in self._higher:
            self._higher[op] = generate_higher_weight(self.N, *op)
        return self._higher[op]

    def keys(self, op=None):
        if op is not None:
            op = _check_op(op)
        if op not in self._keys:
            basis = self.weight_zero if op is None else self.higher(op)
            self._keys[op] = monomial_keys(basis, self.N)
        return self._keys[op]

    def index(self, A, op=None):
        basis = self.weight_zero if op is None else self.higher(op)
        return monomial_indices(A, basis, self.keys(op))

    def __repr__(self):
        return f"DegreeBasis(N={self.N}, weight_zero={len(self.weight_zero)})"


def format_monomial(E):
    """One line of the monomial text format: 27 space-separated integers."""
    return " ".join(str(int(v)) for v in np.asarray(E).reshape(-1))


def parse_monomial(line):
    vals = [int(tok) for tok in line.split()]
    if len(vals) != NVARS or min(vals) < 0:
        raise InvalidInput(f"bad monomial line: {line!r}")
    return tuple(vals)
