"""End-to-end computation of the degree 6, 9 and 12 invariants."""

import logging
import time
from itertools import groupby
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    IntReducer,
    ModReducer,
    canonical_kernel_vectors,
    gauss_lagrange,
    integer_nullspace,
    primitive,
    rref_mod,
    sparse_nullspace_mod,
    symmetric_lift,
)
from .monomials import OPERATORS, DegreeBasis, InvalidInput, as_monomials, monomial_keys
from .operators import (
    DEFAULT_BLOCK_ROWS,
    DEFAULT_PRIME,
    apply_raising_poly,
    build_operator_matrix,
    build_restricted_matrix,
    orbit_indicator,
    restricted_operator_matrix,
)
from .polynomial import Polynomial, multiply
from .symmetry import orbit_decomposition

log = logging.getLogger(__name__)

# normalisation pins, as flattened exponent arrays
I6_PIN = (0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0)  # x133^2 x222^2 x311^2
# x123 x132 x133 x213 x221 x232 x311^2 x322, the minimal member of its orbit
I9_PIN = (0, 0, 0, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 0, 0, 1, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0)


class PipelineError(RuntimeError):
    pass


@dataclass
class OrbitTerm:
    coeff: int
    min_rep: tuple
    size: int
    kind: str = "symmetric"


@dataclass
class InvariantRecord:
    name: str
    degree: int
    kind: str
    orbit_table: list
    expanded: Polynomial = field(repr=False)
    meta: dict = field(default_factory=dict)

    def coefficients(self):
        return [t.coeff for t in self.orbit_table]

    def nonzero_terms(self):
        return [t for t in self.orbit_table if t.coeff]


@dataclass
class RelationReport:
    a: int
    b: int
    residual: Polynomial = field(repr=False)
    square_terms: int = 0

    @property
    def ok(self):
        return self.residual.is_zero()


@dataclass
class AnnihilationReport:
    images: dict = field(repr=False)

    @property
    def ok(self):
        return all(img.is_zero() for img in self.images.values())

    @property
    def failures(self):
        return [op for op, img in self.images.items() if not img.is_zero()]


def verify_annihilation(p):
    """Apply all six raising operators over Z; passes iff every image vanishes."""
    return AnnihilationReport({op: apply_raising_poly(op, p) for op in OPERATORS})


def _scale_to_pin(v, pin_index, p):
    """Scale a mod-p vector so the pinned coordinate is 1, then lift symmetrically."""
    v = np.asarray(v, dtype=np.int64) % p
    if v[pin_index] == 0:
        raise PipelineError("normalisation pin has coefficient 0")
    s = pow(int(v[pin_index]), -1, p)
    return symmetric_lift(v * s % p, p)


def _expand(decomposition, orbit_coeffs, kind):
    """Expand per-orbit coefficients into a polynomial on the weight-zero basis."""
    coeffs = np.asarray(orbit_coeffs, dtype=object)[decomposition.labels]
    if kind == "alternating":
        coeffs = coeffs * decomposition.signs.astype(object)
    nz = np.flatnonzero(coeffs != 0)
    return Polynomial(decomposition.basis[nz], coeffs[nz], _normalized=True)


def _orbit_table(decomposition, coeffs, kind, columns=None):
    cols = range(len(decomposition)) if columns is None else columns
    return [
        OrbitTerm(int(c), decomposition[o].min_rep, decomposition[o].size, kind)
        for o, c in zip(cols, coeffs)
    ]


def full_basis_reducer(N, prime=DEFAULT_PRIME):
    """Stack all six operator matrices of degree ``N`` mod p into one RREF state.

    Returns the reducer and the rank after each operator.
    """
    basis = DegreeBasis(N)
    red = ModReducer(len(basis.weight_zero), prime)
    ranks = []
    for op in OPERATORS:
        M = build_operator_matrix(basis, op, modulus=prime)
        red.add(M.toarray())
        ranks.append(red.rank)
    return red, ranks


def compute_I6(prime=DEFAULT_PRIME):
    """Degree-6 invariant from the full 1152-column system mod ``prime``."""
    t0 = time.perf_counter()
    red, ranks = full_basis_reducer(6, prime)
    ns = red.nullspace()
    if len(ns) != 1:
        raise PipelineError(f"degree-6 nullspace has dimension {len(ns)}, expected 1")
    D = orbit_decomposition(6)
    canonical = symmetric_lift(ns[0], prime)
    pin = D.find(I6_PIN)
    pin_idx = int(D.members(pin)[0])
    vec = _scale_to_pin(ns[0], pin_idx, prime)
    coeffs = []
    for o in range(len(D)):
        vals = np.unique(vec[D.members(o)])
        if len(vals) != 1:
            raise PipelineError(f"degree-6 nullspace vector is not constant on orbit {o}")
        coeffs.append(int(vals[0]))
    expanded = _expand(D, coeffs, "symmetric")
    rec = InvariantRecord(
        "I6", 6, "symmetric", _orbit_table(D, coeffs, "symmetric"), expanded,
        meta={
            "prime": prime,
            "ranks": ranks,
            "rank": red.rank,
            "nullspace_dim": len(ns),
            "pin": {"min_rep": list(D[pin].min_rep), "coeff": 1},
            "canonical_values": sorted(set(int(x) for x in canonical)),
            "seconds": round(time.perf_counter() - t0, 3),
        },
    )
    if not verify_annihilation(expanded).ok:
        raise PipelineError("I6 is not annihilated over Z")
    return rec


def distinct_sorted_rows(blocks):
    """Distinct nonzero rows of a stream of dense integer blocks, in ascending
    lexicographic order."""
    parts = []
    for block in blocks:
        B = np.ascontiguousarray(block, dtype=np.int64)
        B = B[B.any(axis=1)]
        if len(B):
            parts.append(_unique_rows(B))
    if not parts:
        return np.zeros((0, 0), dtype=np.int64)
    U = _unique_rows(np.vstack(parts))
    return U[np.lexsort(U.T[::-1])]


def _unique_rows(B):
    view = B.view(np.dtype((np.void, B.dtype.itemsize * B.shape[1]))).reshape(-1)
    _, first = np.unique(view, return_index=True)
    return B[np.sort(first)]


def _restricted_reduce(reducer, basis, decomposition, kind, columns, block_rows=DEFAULT_BLOCK_ROWS):
    """Feed restricted operator rows to ``reducer``; rank after each operator pass.

    Each pass streams the operator's row blocks, keeps the distinct rows and
    adds them in ascending lexicographic order.  The row space (and lattice)
    does not depend on the order, but over Z this order keeps the echelon
    entries small.
    """
    ranks = []
    blocks = build_restricted_matrix(basis, decomposition, kind, columns, block_rows)
    for op, group in groupby(blocks, key=lambda item: item[0]):
        rows = distinct_sorted_rows(block for _op, _k, block in group)
        log.info("operator %s: %d distinct rows", op, len(rows))
        if len(rows):
            reducer.add(rows)
        ranks.append(reducer.rank)
    return ranks


def compute_I9(mode="orbit-fast", prime=DEFAULT_PRIME):
    """Degree-9 invariant as a combination of alternating orbit sums.

    ``mode="full-basis"`` additionally solves the full 22620-column system
    by sparse elimination and checks both routes agree.
    """
    if mode not in ("orbit-fast", "full-basis"):
        raise InvalidInput(f"unknown mode {mode!r}")
    t0 = time.perf_counter()
    basis = DegreeBasis(9)
    D = orbit_decomposition(9)
    cols = D.alternating_nonzero()
    red = ModReducer(len(cols), prime)
    ranks = _restricted_reduce(red, basis, D, "alternating", cols)
    ns = red.nullspace()
    if len(ns) != 1:
        raise PipelineError(f"restricted degree-9 nullspace has dimension {len(ns)}, expected 1")
    pin = int(np.searchsorted(cols, D.find(I9_PIN)))
    if pin >= len(cols) or cols[pin] != D.find(I9_PIN):
        raise PipelineError("degree-9 pin orbit has a vanishing alternating sum")
    lifted = _scale_to_pin(ns[0], pin, prime)
    coeffs = primitive([int(x) for x in lifted])
    expanded = _expand(D, _full_orbit_vector(D, cols, coeffs), "alternating")
    table = _orbit_table(D, coeffs, "alternating", cols)
    meta = {
        "prime": prime,
        "mode": mode,
        "orbits": len(D),
        "restricted_columns": len(cols),
        "ranks": ranks,
        "nullspace_dim": len(ns),
        "pin": {"monomial": list(I9_PIN), "coeff": 1},
    }
    if mode == "full-basis":
        meta.update(_I9_full_basis_check(basis, D, expanded, prime))
    meta["seconds"] = round(time.perf_counter() - t0, 3)
    rec = InvariantRecord("I9", 9, "alternating", table, expanded, meta)
    if not verify_annihilation(expanded).ok:
        raise PipelineError("I9 is not annihilated over Z")
    return rec


def _full_orbit_vector(D, cols, coeffs):
    full = [0] * len(D)
    for o, c in zip(cols, coeffs):
        full[int(o)] = int(c)
    return full


def _I9_full_basis_check(basis, D, expanded, prime):
    mats = [build_operator_matrix(basis, op, modulus=prime) for op in OPERATORS]
    K = sparse_nullspace_mod(_pairs(mats), len(basis.weight_zero), prime)
    vecs = canonical_kernel_vectors(K, prime)
    if len(vecs) != 1:
        raise PipelineError(f"full degree-9 nullspace has dimension {len(vecs)}, expected 1")
    canonical = symmetric_lift(vecs[0], prime)
    target = np.zeros(len(basis.weight_zero), dtype=np.int64)
    target[basis.index(expanded.exps)] = np.array([int(c) for c in expanded.coeffs], dtype=np.int64)
    pin = int(np.flatnonzero(target)[0])
    full = _scale_to_pin(vecs[0], pin, prime) * int(target[pin])
    if not np.array_equal(full, target):
        raise PipelineError("full-basis and orbit-fast degree-9 vectors disagree")
    return {
        "full_basis_dim": len(vecs),
        "full_basis_zero_coordinates": int((canonical == 0).sum()),
        "canonical_values": sorted(set(int(x) for x in canonical)),
    }


def _pairs(mats):
    import scipy.sparse as sp

    return [sp.vstack(mats[i:i + 2]).tocsr() for i in range(0, len(mats), 2)]


def _gl_pick(b1, b2, D):
    """Reduce the kernel lattice basis and apply the sign pins.

    The shorter reduced vector is I12 (first nonzero coefficient positive);
    the other is I12' (coefficient on orbit 0 positive, or its first nonzero).
    """
    u, v = gauss_lagrange(b1, b2)
    u = _sign_first_nonzero(u)
    if v[0] < 0 or (v[0] == 0 and _sign_first_nonzero(v) != v):
        v = [-x for x in v]
    return u, v


def _sign_first_nonzero(v):
    for x in v:
        if x:
            return list(v) if x > 0 else [-y for y in v]
    return list(v)


def compute_I12_pair(prime=DEFAULT_PRIME, block_rows=DEFAULT_BLOCK_ROWS):
    """Degree-12 invariants I12 and I12' from the symmetric-orbit restriction.

    Runs the mod-``prime`` restricted elimination first as a rank oracle, then
    the integer HNF route. The mod-p kernel alone is not enough here: its RREF
    basis has rational entries and the coefficients (up to 222) are too large
    to reconstruct at a small prime.
    """
    t0 = time.perf_counter()
    basis = DegreeBasis(12)
    D = orbit_decomposition(12)
    n = len(D)
    mod_red = ModReducer(n, prime)
    mod_ranks = _restricted_reduce(mod_red, basis, D, "symmetric", None, block_rows)
    mod_dim = n - mod_red.rank
    log.info("degree 12 mod %d ranks %s", prime, mod_ranks)
    if mod_dim != 2:
        raise PipelineError(f"restricted degree-12 nullspace mod {prime} has dimension {mod_dim}")

    int_red = IntReducer(n)
    int_ranks = _restricted_reduce(int_red, basis, D, "symmetric", None, block_rows)
    M = int_red.matrix()
    if M.shape[0] != 357:
        raise PipelineError(f"integer restricted matrix has rank {M.shape[0]}, expected 357")
    K = integer_nullspace(M)
    if len(K) != 2:
        raise PipelineError(f"integer nullspace has dimension {len(K)}, expected 2")
    b1, b2 = [int(x) for x in K[0]], [int(x) for x in K[1]]
    # the integer kernel must reduce into the mod-p kernel
    stacked = np.vstack([mod_red.nullspace(), np.array([b1, b2], dtype=object) % prime]).astype(np.int64)
    if rref_mod(stacked, prime)[0] != 2:
        raise PipelineError(f"integer kernel disagrees with the kernel mod {prime}")
    meta = {
        "prime": prime,
        "orbits": n,
        "block_rows": block_rows,
        "mod_ranks": mod_ranks,
        "mod_nullspace_dim": mod_dim,
        "int_ranks": int_ranks,
        "int_rank": int(M.shape[0]),
        "hnf_pivots": sorted({int(M[r, c]) for r, c in enumerate(int_red.pivots)}),
    }
    i12, i12p = _gl_pick(b1, b2, D)
    meta["seconds"] = round(time.perf_counter() - t0, 3)
    records = []
    for name, coeffs in (("I12", i12), ("I12prime", i12p)):
        expanded = _expand(D, coeffs, "symmetric")
        rec = InvariantRecord(name, 12, "symmetric", _orbit_table(D, coeffs, "symmetric"), expanded, dict(meta))
        rec.meta["nonzero_orbits"] = sum(1 for c in coeffs if c)
        if not verify_annihilation(expanded).ok:
            raise PipelineError(f"{name} is not annihilated over Z")
        records.append(rec)
    return tuple(records)


def _coefficients_at(poly, exps, N):
    """Coefficients of ``poly`` on the monomials ``exps`` (0 where absent)."""
    out = [0] * len(exps)
    if poly.is_zero():
        return out
    keys = monomial_keys(poly.exps, N)
    q = monomial_keys(as_monomials(exps), N)
    pos = np.searchsorted(keys, q)
    for i, (k, j) in enumerate(zip(q, pos)):
        if j < len(keys) and keys[j] == k:
            out[i] = int(poly.coeffs[j])
    return out


def relation_from_polynomials(i6, i12, i12prime):
    """Solve ``i6^2 = a*i12 + b*i12prime`` on two orbit representatives, then
    check the residual over the full expansion."""
    sq = multiply(i6, i6)
    D = orbit_decomposition(12)
    reps = np.array([o.min_rep for o in D], dtype=np.uint8)
    c12 = _coefficients_at(i12, reps, 12)
    c12p = _coefficients_at(i12prime, reps, 12)
    sq_coef = _coefficients_at(sq, reps, 12)
    a = b = None
    for i in range(len(D)):
        for j in range(i + 1, len(D)):
            det = c12[i] * c12p[j] - c12[j] * c12p[i]
            if det == 0:
                continue
            num_a = sq_coef[i] * c12p[j] - sq_coef[j] * c12p[i]
            num_b = c12[i] * sq_coef[j] - c12[j] * sq_coef[i]
            if num_a % det or num_b % det:
                raise PipelineError("I6^2 is not an integer combination of I12 and I12'")
            a, b = num_a // det, num_b // det
            break
        if a is not None:
            break
    if a is None:
        raise PipelineError("I12 and I12' are proportional on every orbit pair")
    residual = sq - i12.scale(a) - i12prime.scale(b)
    return RelationReport(a, b, residual, len(sq))


def verify_relation(I6, I12, I12prime):
    """Express I6^2 = a*I12 + b*I12' and check the residual vanishes."""
    return relation_from_polynomials(I6.expanded, I12.expanded, I12prime.expanded)


def nullspace_dimension(N, modulus=DEFAULT_PRIME):
    """Dimension of ker(Lambda_N) mod ``modulus``; N = 12 runs orbit-restricted."""
    if N % 3:
        return 0
    if N == 12:
        D = orbit_decomposition(12)
        red = ModReducer(len(D), modulus)
        _restricted_reduce(red, DegreeBasis(12), D, "symmetric", None)
        return len(D) - red.rank
    basis = DegreeBasis(N)
    mats = [build_operator_matrix(basis, op, modulus=modulus) for op in OPERATORS]
    if len(basis.weight_zero) <= 4000:
        red = ModReducer(len(basis.weight_zero), modulus)
        for M in mats:
            red.add(M.toarray())
        return len(basis.weight_zero) - red.rank
    K = sparse_nullspace_mod(_pairs(mats), len(basis.weight_zero), modulus)
    return K.shape[1]
