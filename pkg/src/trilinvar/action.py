"""SL3 x SL3 x SL3 acting on 3x3x3 integer arrays, and randomized invariance checks.

A triple ``(A, B, C)`` acts on the coordinate functions by

    x_ijk  ->  sum_{p,q,r} a_pi b_qj c_rk x_pqr

so arrays transform by the same contraction, which makes
``evaluate(f, transform(X, g)) == evaluate(g . f, X)``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .monomials import InvalidInput
from .polynomial import evaluate


def det3(M):
    """Exact determinant of a 3x3 integer matrix."""
    m = [[int(v) for v in row] for row in np.asarray(M, dtype=object).reshape(3, 3)]
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _int_matrix(M):
    arr = np.asarray(M, dtype=object)
    if arr.shape != (3, 3):
        raise InvalidInput(f"expected a 3x3 matrix, got shape {arr.shape}")
    out = np.empty((3, 3), dtype=object)
    for idx, v in np.ndenumerate(arr):
        if int(v) != v:
            raise InvalidInput("matrix entries must be integers")
        out[idx] = int(v)
    return out


@dataclass(frozen=True)
class GroupAction:
    """A triple of 3x3 integer matrices.

    By default each matrix must have determinant exactly 1; pass
    ``special=False`` to allow any invertible integer matrices (used to probe
    how invariants scale under determinant -1).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    special: bool = field(default=True, compare=False)

    def __post_init__(self):
        for name in "ABC":
            M = _int_matrix(getattr(self, name))
            object.__setattr__(self, name, M)
            d = det3(M)
            if self.special and d != 1:
                raise InvalidInput(f"matrix {name} has determinant {d}, expected 1")
            if d == 0:
                raise InvalidInput(f"matrix {name} is singular")

    @classmethod
    def identity(cls):
        I = np.eye(3, dtype=np.int64)
        return cls(I, I, I)

    @property
    def dets(self):
        return det3(self.A), det3(self.B), det3(self.C)

    def then(self, other):
        """The action equal to applying ``self`` first and ``other`` second."""
        return GroupAction(self.A @ other.A, self.B @ other.B, self.C @ other.C,
                           special=self.special and other.special)


def compose(g, h):
    """``g`` followed by ``h``: transform(transform(X, g), h) == transform(X, compose(g, h))."""
    return g.then(h)


def as_array(X):
    """3x3x3 object array of Python ints."""
    arr = np.asarray(X, dtype=object)
    if arr.size != 27:
        raise InvalidInput(f"array must have 27 entries, got {arr.size}")
    arr = arr.reshape(3, 3, 3)
    out = np.empty((3, 3, 3), dtype=object)
    for idx, v in np.ndenumerate(arr):
        if int(v) != v:
            raise InvalidInput("array entries must be integers")
        out[idx] = int(v)
    return out


def transform(X, g):
    """``Y[i,j,k] = sum a_pi b_qj c_rk X[p,q,r]`` in exact integer arithmetic."""
    X = as_array(X)
    Y = np.tensordot(g.A.T, X, axes=(1, 0))  # (i, q, r)
    Y = np.tensordot(g.B.T, Y, axes=(1, 1)).transpose(1, 0, 2)  # (i, j, r)
    Y = np.tensordot(Y, g.C, axes=(2, 0))  # (i, j, k)
    return Y


def transvection(i, j, t):
    """``I + t * E_ij`` (0-based, i != j)."""
    if i == j:
        raise InvalidInput("transvection needs i != j")
    M = np.eye(3, dtype=object)
    M[i, j] = int(t)
    return M


def random_sl3(seed=None, count=None, rng=None):
    """Product of 3 to 6 random transvections ``I + t E_ij`` with 1 <= |t| <= 3.

    ``count`` fixes the number of factors (0 gives the identity).
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    if count is None:
        count = int(rng.integers(3, 7))
    M = np.eye(3, dtype=object)
    for _ in range(count):
        i, j = rng.choice(3, size=2, replace=False)
        t = int(rng.integers(1, 4)) * (1 if rng.integers(2) else -1)
        M = M @ transvection(int(i), int(j), t)
    return M


def random_action(rng):
    return GroupAction(random_sl3(rng=rng), random_sl3(rng=rng), random_sl3(rng=rng))


def random_array(rng, low=-9, high=9):
    return as_array(rng.integers(low, high + 1, size=27))


@dataclass
class InvarianceReport:
    trials: int
    passed: int
    counterexample: dict = None

    @property
    def failed(self):
        return self.trials - self.passed

    @property
    def ok(self):
        return self.passed == self.trials


def invariance_test(p, trials=100, seed=0):
    """Compare ``p(X)`` with ``p(transform(X, g))`` on random arrays and triples."""
    if not p.is_homogeneous():
        raise InvalidInput("invariance test needs a homogeneous polynomial")
    rng = np.random.default_rng(seed)
    passed = 0
    first = None
    for trial in range(trials):
        X = random_array(rng)
        g = random_action(rng)
        before = evaluate(p, X)
        after = evaluate(p, transform(X, g))
        if before == after:
            passed += 1
        elif first is None:
            first = {
                "trial": trial,
                "X": to_nested(X),
                "A": to_nested(g.A), "B": to_nested(g.B), "C": to_nested(g.C),
                "before": before, "after": after,
            }
    return InvarianceReport(trials, passed, first)


def to_nested(arr):
    return [to_nested(a) for a in arr] if isinstance(arr, np.ndarray) else int(arr)


def load_array(path):
    """Read a 3x3x3 integer array stored as JSON nested lists ``[i][j][k]``."""
    with open(path) as fh:
        data = json.load(fh)
    try:
        arr = np.array(data, dtype=object)
    except ValueError as exc:
        raise InvalidInput(f"{path}: not a rectangular array") from exc
    if arr.shape != (3, 3, 3):
        raise InvalidInput(f"{path}: expected shape 3x3x3, got {arr.shape}")
    return as_array(arr)
