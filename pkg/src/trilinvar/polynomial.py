"""Sparse integer polynomials in the 27 variables x_ijk."""

import numpy as np

from .monomials import NVARS, as_monomials, format_monomial, lex_sort, monomial_keys, InvalidInput

# above this many term products, multiplication runs in chunks
_CHUNK = 2_000_000


def _to_object(values):
    out = np.empty(len(values), dtype=object)
    out[:] = [int(v) for v in values]
    return out


def _collect(exps, coeffs, homogeneous_degree=None):
    """Sort terms by monomial order, merge duplicates, drop zeros."""
    if len(exps) == 0:
        return exps.reshape(0, NVARS), coeffs[:0]
    if homogeneous_degree is not None:
        order = np.argsort(monomial_keys(exps, homogeneous_degree), kind="stable")
    else:
        order = np.lexsort(exps.T[::-1])
    exps = exps[order]
    coeffs = coeffs[order]
    new = np.ones(len(exps), dtype=bool)
    new[1:] = (exps[1:] != exps[:-1]).any(axis=1)
    starts = np.flatnonzero(new)
    exps = exps[starts]
    coeffs = np.add.reduceat(coeffs, starts)
    nz = coeffs != 0
    return exps[nz], coeffs[nz]


def _common_degree(exps):
    if len(exps) == 0:
        return None
    degs = exps.sum(axis=1, dtype=np.int64)
    return int(degs[0]) if (degs == degs[0]).all() else None


class Polynomial:
    """An immutable sparse polynomial with arbitrary-precision integer coefficients.

    Terms are kept sorted in the monomial order with no zero coefficients.
    ``exps`` is an ``(n, 27)`` uint8 array, ``coeffs`` an object array of ints.
    """

    __slots__ = ("exps", "coeffs", "_degree", "_plan")

    def __init__(self, exps=None, coeffs=None, *, _normalized=False):
        if exps is None:
            exps = np.zeros((0, NVARS), dtype=np.uint8)
            coeffs = np.zeros(0, dtype=object)
        exps = as_monomials(exps)
        if coeffs is None:
            coeffs = np.ones(len(exps), dtype=object)
        elif not (isinstance(coeffs, np.ndarray) and coeffs.dtype == object):
            coeffs = _to_object(np.asarray(coeffs).reshape(-1))
        if len(coeffs) != len(exps):
            raise InvalidInput("exponent rows and coefficients differ in length")
        deg = _common_degree(exps)
        if not _normalized:
            exps, coeffs = _collect(exps, coeffs, deg if deg is not None and deg <= 12 else None)
            deg = _common_degree(exps)
        exps.setflags(write=False)
        coeffs.setflags(write=False)
        self.exps = exps
        self.coeffs = coeffs
        self._degree = deg
        self._plan = None

    # construction helpers

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, c):
        return cls(np.zeros((1, NVARS), dtype=np.uint8), [c])

    @classmethod
    def monomial(cls, E, c=1):
        return cls(as_monomials(np.asarray(E).reshape(-1)), [c])

    @classmethod
    def variable(cls, i, j, k):
        """The coordinate ``x_ijk`` (1-based subscripts)."""
        e = np.zeros(NVARS, dtype=np.uint8)
        e[9 * (i - 1) + 3 * (j - 1) + (k - 1)] = 1
        return cls.monomial(e)

    @classmethod
    def from_dict(cls, terms):
        if not terms:
            return cls()
        keys = list(terms)
        return cls(np.array(keys, dtype=np.uint8).reshape(-1, NVARS), [terms[k] for k in keys])

    def to_dict(self):
        return {tuple(int(v) for v in e): int(c) for e, c in zip(self.exps, self.coeffs)}

    # basic queries

    def __len__(self):
        return len(self.exps)

    def __iter__(self):
        for e, c in zip(self.exps, self.coeffs):
            yield tuple(int(v) for v in e), int(c)

    def __bool__(self):
        return len(self.exps) > 0

    def is_zero(self):
        return len(self.exps) == 0

    @property
    def degree(self):
        """Common total degree of all terms, or None if inhomogeneous or zero."""
        return self._degree

    def is_homogeneous(self):
        return self._degree is not None or self.is_zero()

    def coefficient(self, E):
        E = as_monomials(np.asarray(E).reshape(-1))[0]
        hit = np.flatnonzero((self.exps == E).all(axis=1))
        return int(self.coeffs[hit[0]]) if len(hit) else 0

    def __eq__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(other) if other else Polynomial()
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            len(self) == len(other)
            and np.array_equal(self.exps, other.exps)
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    __hash__ = None

    def __repr__(self):
        if self.is_zero():
            return "Polynomial(0)"
        return f"Polynomial({len(self)} terms, degree={self._degree})"

    def __str__(self):
        parts = []
        for e, c in self:
            mono = "*".join(
                f"x{p // 9 + 1}{p // 3 % 3 + 1}{p % 3 + 1}" + (f"^{v}" if v > 1 else "")
                for p, v in enumerate(e) if v
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts) if parts else "0"

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, np.integer)):
            return Polynomial.constant(int(other)) if other else Polynomial()
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        return Polynomial(np.vstack([self.exps, other.exps]), np.concatenate([self.coeffs, other.coeffs]))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.exps, -self.coeffs, _normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = int(c)
        if c == 0:
            return Polynomial()
        return Polynomial(self.exps, self.coeffs * c, _normalized=True)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(other)
        if isinstance(other, Polynomial):
            return multiply(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def evaluate(self, X):
        return evaluate(self, X)

    def to_lines(self):
        """Expanded text format: ``<coeff> <27 ints>`` per term, in monomial order."""
        return [f"{int(c)} {format_monomial(e)}" for e, c in zip(self.exps, self.coeffs)]

    @classmethod
    def from_lines(cls, lines):
        rows, coeffs = [], []
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            if len(toks) != NVARS + 1:
                raise InvalidInput(f"bad expanded-polynomial line: {line!r}")
            coeffs.append(int(toks[0]))
            rows.append([int(t) for t in toks[1:]])
        if not rows:
            return cls()
        return cls(np.array(rows, dtype=np.int64), coeffs)


def multiply(p, q):
    """Exact product of two sparse polynomials (hash-free sort-and-collect)."""
    if p.is_zero() or q.is_zero():
        return Polynomial()
    if len(p) > len(q):
        p, q = q, p
    deg = p.degree + q.degree if p.degree is not None and q.degree is not None else None
    if deg is not None and deg > 12:
        deg = None
    step = max(1, _CHUNK // len(q))
    acc_e, acc_c = [], []
    for s in range(0, len(p), step):
        pe = p.exps[s:s + step]
        pc = p.coeffs[s:s + step]
        if int(pe.max()) + int(q.exps.max()) > 255:
            raise InvalidInput("exponent overflow in product")
        e = (pe[:, None, :] + q.exps[None, :, :]).reshape(-1, NVARS)
        c = np.multiply.outer(pc, q.coeffs).reshape(-1)
        e, c = _collect(e, c, deg)
        acc_e.append(e)
        acc_c.append(c)
    if len(acc_e) == 1:
        return Polynomial(acc_e[0], acc_c[0], _normalized=True)
    return Polynomial(np.vstack(acc_e), np.concatenate(acc_c))


def _power_table(X, max_exp):
    flat = [int(v) for v in np.asarray(X).reshape(-1)]
    if len(flat) != NVARS:
        raise InvalidInput("array must have 27 entries")
    table = np.empty((NVARS, max_exp + 1), dtype=object)
    for pos, x in enumerate(flat):
        acc = 1
        for e in range(max_exp + 1):
            table[pos, e] = acc
            acc *= x
    return table


def _eval_plan(p):
    """Split every monomial into its three i-slice factors, deduplicated per slice."""
    if p._plan is None:
        parts = []
        for s in range(3):
            block = p.exps[:, 9 * s:9 * s + 9]
            uniq, inv = np.unique(block, axis=0, return_inverse=True)
            parts.append((9 * s, uniq.astype(np.intp), inv.reshape(-1)))
        p._plan = parts
    return p._plan


def evaluate(p, X):
    """Exact integer value of ``p`` at the 3x3x3 integer array ``X``."""
    if p.is_zero():
        return 0
    table = _power_table(X, int(p.exps.max()))
    vals = None
    for offset, uniq, inv in _eval_plan(p):
        part = np.ones(len(uniq), dtype=object)
        for col in np.flatnonzero(uniq.any(axis=0)):
            part = part * table[offset + col][uniq[:, col]]
        part = part[inv]
        vals = part if vals is None else vals * part
    return int(np.dot(vals, p.coeffs))
