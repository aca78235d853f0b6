"""Exact linear algebra: reduced row echelon form and nullspaces over Z/p,
integer Hermite normal form with transform, 2-D lattice reduction."""

from math import gcd

import numpy as np

from .monomials import InvalidInput

# float64 products are exact below 2**53
_FLOAT_EXACT = 2**53


def _check_prime(p):
    p = int(p)
    if p < 3 or p % 2 == 0 or any(p % d == 0 for d in range(3, int(p**0.5) + 1, 2)):
        raise InvalidInput(f"modulus must be an odd prime, got {p}")
    return p


def _mulmod(A, B, p):
    """``A @ B mod p`` for int64 matrices with entries in [0, p)."""
    inner = A.shape[1]
    if inner == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if inner * (p - 1) ** 2 < _FLOAT_EXACT:
        return np.remainder(A.astype(np.float64) @ B.astype(np.float64), p).astype(np.int64)
    if inner * (p - 1) ** 2 < 2**63:
        return (A @ B) % p
    return ((A.astype(object) @ B.astype(object)) % p).astype(np.int64)


def _gauss_jordan(A, p):
    """In-place RREF of a small int64 matrix mod p; returns the pivot columns."""
    nrows, ncols = A.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        col = A[r:, c]
        nz = np.flatnonzero(col)
        if len(nz) == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r, c:] = (A[r, c:] * inv) % p
        others = np.flatnonzero(A[:, c])
        others = others[others != r]
        if len(others):
            A[others, c:] = (A[others, c:] - np.outer(A[others, c], A[r, c:])) % p
        pivots.append(c)
        r += 1
    return pivots


class ModReducer:
    """Reduced row echelon form mod p, grown by appending row blocks.

    The RREF of a row space is unique, so the state after any sequence of
    appends equals ``rref_mod`` of all rows stacked.
    """

    ring = "mod"

    def __init__(self, ncols, p=101, chunk=128):
        self.p = _check_prime(p)
        self.ncols = int(ncols)
        self.R = np.zeros((0, self.ncols), dtype=np.int64)
        self.pivots = []
        self.chunk = chunk
        self._seen = set()

    @property
    def rank(self):
        return len(self.pivots)

    def add(self, block):
        """Append rows and re-reduce; returns the rank afterwards."""
        B = np.asarray(block)
        if B.ndim == 1:
            B = B[None, :]
        if B.shape[1] != self.ncols:
            raise InvalidInput(f"block has {B.shape[1]} columns, expected {self.ncols}")
        B = np.remainder(B.astype(np.int64) if B.dtype != object else B, self.p).astype(np.int64)
        B = B[B.any(axis=1)]
        if len(B):
            B = self._novel(B)
        for s in range(0, len(B), self.chunk):
            if self.rank == self.ncols:
                break
            self._add_chunk(B[s:s + self.chunk].copy())
        return self.rank

    def _novel(self, B):
        keep = []
        for i, row in enumerate(B):
            key = row.tobytes()
            if key not in self._seen:
                self._seen.add(key)
                keep.append(i)
        return B[keep]

    def _add_chunk(self, B):
        p = self.p
        if self.rank:
            B = (B - _mulmod(B[:, self.pivots], self.R, p)) % p
            B = B[B.any(axis=1)]
            if len(B) == 0:
                return
        new_piv = _gauss_jordan(B, p)
        if not new_piv:
            return
        B = B[: len(new_piv)]
        if self.rank:
            self.R = (self.R - _mulmod(self.R[:, new_piv], B, p)) % p
        R = np.vstack([self.R, B])
        piv = self.pivots + new_piv
        order = np.argsort(piv, kind="stable")
        self.R = R[order]
        self.pivots = [piv[i] for i in order]

    def nullspace(self):
        return nullspace_from_rref(self.R, self.pivots, self.ncols, self.p)


def rref_mod(M, p=101):
    """Reduced row echelon form of ``M`` over Z/p.

    Returns ``(rank, R, pivots)`` where ``R`` has ``rank`` rows.
    """
    M = np.asarray(M)
    if M.ndim != 2:
        raise InvalidInput("expected a 2-D matrix")
    red = ModReducer(M.shape[1], p)
    red.add(M)
    return red.rank, red.R.copy(), list(red.pivots)


def nullspace_from_rref(R, pivots, ncols, p):
    """One vector per free column (free variable 1, pivot variables solved), mod p."""
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for f in free:
        v = np.zeros(ncols, dtype=np.int64)
        v[f] = 1
        if len(pivots):
            v[list(pivots)] = (-R[:, f]) % p
        basis.append(v)
    return basis


def nullspace_mod(M, p=101):
    """Canonical nullspace basis of ``M`` mod p (see :func:`nullspace_from_rref`)."""
    M = np.asarray(M)
    _, R, piv = rref_mod(M, p)
    return nullspace_from_rref(R, piv, M.shape[1], p)


def symmetric_lift(v, p=101):
    """Map residues mod p to integers in (-p/2, p/2]."""
    arr = np.remainder(np.asarray(v, dtype=np.int64), p)
    half = p // 2
    return np.where(arr > half, arr - p, arr)


# ---------------------------------------------------------------------------
# sparse nullspace mod p by successive restriction

def _components(M):
    """Connected components of the bipartite row/column graph of sparse ``M``."""
    import scipy.sparse as sp
    from scipy.sparse.csgraph import connected_components

    nrows, ncols = M.shape
    C = sp.coo_matrix(M)
    n = nrows + ncols
    G = sp.coo_matrix((np.ones(len(C.data)), (C.row, nrows + C.col)), shape=(n, n))
    _, lab = connected_components(G, directed=False)
    col_lab = lab[nrows:]
    row_lab = lab[:nrows]
    return row_lab, col_lab


def sparse_nullspace_mod(blocks, ncols, p=101, dense_limit=6000):
    """Nullspace mod p of the vertical stack of sparse matrices ``blocks``.

    Kernels are intersected one block at a time: with ``K`` spanning the
    kernel so far, the next kernel is ``K @ ker(A @ K)``.  Each restricted
    matrix is split into connected components and every component is
    eliminated densely.  Returns a sparse ``(ncols, d)`` basis matrix.
    """
    import scipy.sparse as sp

    p = _check_prime(p)
    K = sp.identity(ncols, dtype=np.int64, format="csr")
    for A in blocks:
        A = sp.csr_matrix(A, dtype=np.int64)
        A.data %= p
        MK = (A @ K).tocsr()
        MK.data %= p
        MK.eliminate_zeros()
        d = MK.shape[1]
        row_lab, col_lab = _components(MK)
        kern_rows, kern_cols, kern_vals = [], [], []
        out = 0
        order = np.argsort(col_lab, kind="stable")
        bounds = np.flatnonzero(np.diff(col_lab[order])) + 1
        for cols in np.split(order, bounds):
            rows = np.flatnonzero(np.isin(row_lab, np.unique(col_lab[cols])))
            if len(rows) == 0:
                for c in cols:
                    kern_rows.append(int(c))
                    kern_cols.append(out)
                    kern_vals.append(1)
                    out += 1
                continue
            if len(cols) > dense_limit:
                raise MemoryError(f"component with {len(cols)} columns exceeds dense limit")
            sub = MK[rows][:, cols]
            red = ModReducer(len(cols), p)
            for s in range(0, sub.shape[0], 2048):
                red.add(sub[s:s + 2048].toarray())
                if red.rank == len(cols):
                    break
            for v in red.nullspace():
                nz = np.flatnonzero(v)
                kern_rows.extend(int(c) for c in cols[nz])
                kern_cols.extend([out] * len(nz))
                kern_vals.extend(int(x) for x in v[nz])
                out += 1
        Kstep = sp.csr_matrix((kern_vals, (kern_rows, kern_cols)), shape=(d, out), dtype=np.int64)
        K = (K @ Kstep).tocsr()
        K.data %= p
        K.eliminate_zeros()
        if out == 0:
            break
    return K


def canonical_kernel_vectors(K, p):
    """RREF-canonical nullspace basis from any basis (columns of ``K``) mod p.

    Equivalent to reducing the column space so each vector has a 1 at its own
    free column and 0 at the others' free columns.
    """
    V = np.asarray(K.todense() if hasattr(K, "todense") else K, dtype=np.int64).T % p
    if V.shape[0] == 0:
        return []
    # echelon from the right: the free columns are the trailing pivots
    rev = V[:, ::-1].copy()
    piv = _gauss_jordan(rev, p)
    rev = rev[: len(piv)]
    out = [row[::-1].copy() for row in rev]
    return out[::-1]


# ---------------------------------------------------------------------------
# integers

def _xgcd(a, b):
    """``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def _obj(M):
    A = np.asarray(M)
    if A.dtype != object:
        return A.astype(object)
    return A.copy()


def hnf(M):
    """Row-style Hermite normal form with unimodular transform.

    Returns ``(H, U)`` (object arrays of Python ints) with ``U @ M == H``:
    ``H`` is in echelon form, pivots positive, entries above each pivot in
    ``[0, pivot)``, zero rows last.  Rows ``rank..`` of ``U`` span the integer
    left nullspace of ``M``.
    """
    A = _obj(M)
    if A.ndim != 2:
        raise InvalidInput("expected a 2-D matrix")
    m, n = A.shape
    U = np.zeros((m, m), dtype=object)
    for i in range(m):
        U[i] = [1 if i == j else 0 for j in range(m)]
    r = 0
    pivots = []
    for c in range(n):
        if r == m:
            break
        nz = [i for i in range(r, m) if A[i, c] != 0]
        if not nz:
            continue
        # fold every nonzero entry of column c into row r
        k = min(nz, key=lambda i: abs(A[i, c]))
        if k != r:
            A[[r, k]] = A[[k, r]]
            U[[r, k]] = U[[k, r]]
        for i in range(r + 1, m):
            b = A[i, c]
            if b == 0:
                continue
            a = A[r, c]
            if b % a == 0:
                q = b // a
                A[i] = A[i] - q * A[r]
                U[i] = U[i] - q * U[r]
                continue
            g, s, t = _xgcd(a, b)
            ar, ai = A[r].copy(), A[i].copy()
            ur, ui = U[r].copy(), U[i].copy()
            A[r] = s * ar + t * ai
            U[r] = s * ur + t * ui
            A[i] = (a // g) * ai - (b // g) * ar
            U[i] = (a // g) * ui - (b // g) * ur
        if A[r, c] < 0:
            A[r] = -A[r]
            U[r] = -U[r]
        h = A[r, c]
        for i in range(r):
            q = A[i, c] // h
            if q:
                A[i] = A[i] - q * A[r]
                U[i] = U[i] - q * U[r]
        pivots.append(c)
        r += 1
    return A, U


def hnf_rank(H):
    return int(sum(1 for row in np.asarray(H) if any(x != 0 for x in row)))


class IntReducer:
    """Integer row lattice kept in echelon form, grown by appending row blocks.

    Rows are folded in with extended-gcd steps, so the lattice (not just the
    rational span) is tracked exactly.  :meth:`matrix` returns the Hermite
    normal form of everything added so far.  Exact duplicate rows are
    skipped since they cannot change the lattice.
    """

    ring = "int"

    def __init__(self, ncols):
        self.ncols = int(ncols)
        self.rows = {}  # pivot column -> object row with positive pivot
        self._seen = set()

    @property
    def rank(self):
        return len(self.rows)

    @property
    def pivots(self):
        return sorted(self.rows)

    def add(self, block):
        B = np.asarray(block)
        if B.ndim == 1:
            B = B[None, :]
        if B.shape[1] != self.ncols:
            raise InvalidInput(f"block has {B.shape[1]} columns, expected {self.ncols}")
        for row in B:
            if not row.any():
                continue
            key = np.asarray(row, dtype=np.int64).tobytes() if row.dtype != object else tuple(row)
            if key in self._seen:
                continue
            self._seen.add(key)
            self._insert(_obj(row))
        return self.rank

    def _insert(self, v):
        rows = self.rows
        while True:
            nz = np.flatnonzero(v)
            if len(nz) == 0:
                return
            c = int(nz[0])
            piv = rows.get(c)
            if piv is None:
                rows[c] = -v if v[c] < 0 else v
                return
            h, a = piv[c], v[c]
            if a % h == 0:
                v = v - (a // h) * piv
                continue
            g, s, t = _xgcd(h, a)
            new = s * piv + t * v
            v = (h // g) * v - (a // g) * piv
            rows[c] = -new if new[c] < 0 else new

    def matrix(self):
        """Hermite normal form of the lattice (rank x ncols object array)."""
        piv = self.pivots
        if not piv:
            return np.zeros((0, self.ncols), dtype=object)
        H = np.stack([self.rows[c].copy() for c in piv])
        for r, c in enumerate(piv):
            h = H[r, c]
            for i in range(r):
                q = H[i, c] // h
                if q:
                    H[i] = H[i] - q * H[r]
        return H


def integer_nullspace(M):
    """Lattice basis of ``{v in Z^n : M v = 0}`` from the HNF of ``M^T``."""
    A = _obj(M)
    H, U = hnf(A.T)
    r = hnf_rank(H)
    return U[r:]


def gauss_lagrange(b1, b2):
    """Gauss-Lagrange reduction of a rank-2 integer lattice basis.

    Returns ``(u, v)`` spanning the same lattice with ``|u| <= |v|`` and
    ``|v| <= |v + k u|`` for every integer ``k``.
    """
    u = [int(x) for x in b1]
    v = [int(x) for x in b2]
    if len(u) != len(v):
        raise InvalidInput("basis vectors differ in length")

    def dot(a, b):
        return sum(x * y for x, y in zip(a, b))

    uu, vv, uv = dot(u, u), dot(v, v), dot(u, v)
    if uu * vv - uv * uv == 0:
        raise InvalidInput("basis vectors are linearly dependent")
    if uu > vv:
        u, v = v, u
    while True:
        uu, uv = dot(u, u), dot(u, v)
        # nearest integer to uv/uu, ties toward -inf
        q = (2 * uv + uu) // (2 * uu)
        if q:
            v = [y - q * x for x, y in zip(u, v)]
        if dot(v, v) >= uu:
            return u, v
        u, v = v, u


def primitive(v):
    """Divide an integer vector by the gcd of its entries."""
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        return list(v)
    return [int(x) // g for x in v]
