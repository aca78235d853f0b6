"""The order-1296 group (S3 x S3 x S3) x| S3 acting on weight-zero exponent arrays.

Convention: for ``g = (alpha, beta, gamma, delta)`` the direction permutation
acts first and the slice permutations second,

    (delta . E)[t1, t2, t3]   = E[t_delta(1), t_delta(2), t_delta(3)]
    (g . E)[i, j, k]          = (delta . E)[alpha(i), beta(j), gamma(k)]

Orbits and orbit sums do not depend on this choice.  Every element is also
recorded as a permutation ``perm`` of the 27 flattened cells with
``act(g, E)[pos] == E[perm[pos]]``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product

import numpy as np

from .monomials import NVARS, InvalidInput, as_monomials, generate_weight_zero, monomial_keys, weights
from .polynomial import Polynomial

S3 = tuple(permutations(range(3)))
GROUP_ORDER = 1296


def perm_sign(p):
    sign = 1
    seen = [False] * len(p)
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = p[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class GroupElement:
    """Slice permutations per direction plus a permutation of the directions.

    Permutations are 0-based tuples: ``alpha[i]`` is the image of ``i``.
    """

    alpha: tuple = (0, 1, 2)
    beta: tuple = (0, 1, 2)
    gamma: tuple = (0, 1, 2)
    delta: tuple = (0, 1, 2)

    def __post_init__(self):
        for p in (self.alpha, self.beta, self.gamma, self.delta):
            if tuple(sorted(p)) != (0, 1, 2):
                raise InvalidInput(f"{p!r} is not a permutation of (0, 1, 2)")

    @property
    def sign(self):
        return perm_sign(self.alpha) * perm_sign(self.beta) * perm_sign(self.gamma) * perm_sign(self.delta)

    @property
    def perm(self):
        return _cell_perm(self)

    def __mul__(self, other):
        return compose(self, other)

    def inverse(self):
        inv = np.argsort(self.perm)
        return _by_perm()[tuple(int(v) for v in inv)]


IDENTITY = GroupElement()


@lru_cache(maxsize=None)
def _cell_perm(g):
    perm = np.empty(NVARS, dtype=np.intp)
    for i, j, k in product(range(3), repeat=3):
        u = (g.alpha[i], g.beta[j], g.gamma[k])
        src = (u[g.delta[0]], u[g.delta[1]], u[g.delta[2]])
        perm[9 * i + 3 * j + k] = 9 * src[0] + 3 * src[1] + src[2]
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=None)
def group_elements():
    """All 1296 elements in a fixed order (delta outermost)."""
    return tuple(GroupElement(a, b, c, d) for d, a, b, c in product(S3, S3, S3, S3))


@lru_cache(maxsize=None)
def _by_perm():
    table = {tuple(int(v) for v in g.perm): g for g in group_elements()}
    if len(table) != GROUP_ORDER:
        raise RuntimeError("group does not act faithfully on cells")
    return table


@lru_cache(maxsize=None)
def perm_table():
    """``(1296, 27)`` array of cell permutations and ``(1296,)`` signs, in group order."""
    G = group_elements()
    perms = np.stack([g.perm for g in G])
    signs = np.array([g.sign for g in G], dtype=np.int64)
    perms.setflags(write=False)
    signs.setflags(write=False)
    return perms, signs


def compose(g, h):
    """The element ``g*h`` with ``act(g*h, E) == act(g, act(h, E))``."""
    p = h.perm[g.perm]
    return _by_perm()[tuple(int(v) for v in p)]


def act(g, E):
    """Apply ``g`` to one exponent array (any length-27 sequence or 3x3x3 array)."""
    flat = np.asarray(E).reshape(NVARS)
    return flat[g.perm]


def act_all(E):
    """Images of ``E`` under all 1296 elements, as a ``(1296, 27)`` uint8 array."""
    e = as_monomials(np.asarray(E).reshape(-1))[0]
    perms, _ = perm_table()
    return e[perms]


def _require_weight_zero(E):
    w = weights(as_monomials(np.asarray(E).reshape(-1)))[0]
    if w.any():
        raise InvalidInput("orbits are only defined for weight-zero exponent arrays")


@dataclass
class Orbit:
    min_rep: tuple
    size: int
    elements: np.ndarray = field(default=None, repr=False)

    @property
    def degree(self):
        return sum(self.min_rep)

    @property
    def stabilizer_order(self):
        return GROUP_ORDER // self.size


def _distinct_images(E):
    imgs = act_all(E)
    N = int(imgs[0].sum())
    keys = monomial_keys(imgs, N)
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return imgs, uniq, first, inverse.reshape(-1)


def orbit(E):
    """The orbit of a weight-zero exponent array, with its sorted element set."""
    _require_weight_zero(E)
    imgs, uniq, first, _ = _distinct_images(E)
    elements = imgs[first]  # sorted because keys are monotone
    elements.setflags(write=False)
    return Orbit(tuple(int(v) for v in elements[0]), len(uniq), elements)


def stabilizer(E):
    e = np.asarray(E).reshape(NVARS)
    return [g for g in group_elements() if np.array_equal(e[g.perm], e)]


def symmetric_orbit_sum(E):
    """Sum of the distinct monomials in the orbit of ``E``, each with coefficient 1."""
    orb = orbit(E)
    return Polynomial(orb.elements, np.ones(orb.size, dtype=object), _normalized=True)


def alternating_orbit_sum(E):
    """Signed orbit sum, normalised so the minimal representative has coefficient +1.

    Identically zero when some odd group element fixes ``E``.
    """
    _require_weight_zero(E)
    imgs, uniq, first, inverse = _distinct_images(E)
    _, signs = perm_table()
    pos = np.zeros(len(uniq), dtype=bool)
    neg = np.zeros(len(uniq), dtype=bool)
    pos[inverse[signs > 0]] = True
    neg[inverse[signs < 0]] = True
    if (pos & neg).any():
        return Polynomial()
    coeff = np.where(pos, 1, -1)
    coeff = coeff * coeff[0]
    return Polynomial(imgs[first], coeff, _normalized=True)


class OrbitDecomposition:
    """The G-orbits partitioning the weight-zero basis of one degree.

    ``labels[c]`` is the orbit number (0-based, orbits sorted by minimal
    representative) of the c-th weight-zero monomial; ``signs[c]`` is the
    coefficient of that monomial in its normalised alternating orbit sum
    (0 where the alternating sum vanishes).
    """

    def __init__(self, N):
        self.N = int(N)
        W = generate_weight_zero(self.N)
        self.basis = W
        keys = monomial_keys(W, self.N) if len(W) else np.zeros(0, dtype=np.int64)
        labels = np.full(len(W), -1, dtype=np.int64)
        signs = np.zeros(len(W), dtype=np.int64)
        perms, gsigns = perm_table()
        orbits = []
        cursor = 0
        while cursor < len(W):
            if labels[cursor] >= 0:
                cursor += 1
                continue
            seed = W[cursor]
            imgs = seed[perms]
            idx = np.searchsorted(keys, monomial_keys(imgs, self.N))
            members = np.unique(idx)
            if labels[members].max() >= 0 or not np.array_equal(W[idx], imgs):
                raise RuntimeError("orbit sweep found an image outside the weight-zero basis")
            labels[members] = len(orbits)
            pos = np.zeros(len(W), dtype=bool)
            pos[idx[gsigns > 0]] = True
            neg = np.zeros(len(W), dtype=bool)
            neg[idx[gsigns < 0]] = True
            if not (pos & neg)[members].any():
                s = np.where(pos[members], 1, -1)
                signs[members] = s * s[0]
            orbits.append(Orbit(tuple(int(v) for v in seed), len(members)))
            cursor += 1
        self.orbits = orbits
        self.labels = labels
        self.signs = signs

    def __len__(self):
        return len(self.orbits)

    def __iter__(self):
        return iter(self.orbits)

    def __getitem__(self, i):
        return self.orbits[i]

    def members(self, i):
        return np.flatnonzero(self.labels == i)

    def alternating_nonzero(self):
        """Orbit numbers whose alternating orbit sum is not identically zero."""
        hit = np.zeros(len(self.orbits), dtype=bool)
        hit[self.labels[self.signs != 0]] = True
        return np.flatnonzero(hit)

    def find(self, E):
        """Orbit number containing the weight-zero monomial ``E``."""
        keys = monomial_keys(self.basis, self.N)
        q = monomial_keys(as_monomials(np.asarray(E).reshape(-1)), self.N)
        pos = int(np.searchsorted(keys, q)[0])
        if pos >= len(keys) or keys[pos] != q[0]:
            raise InvalidInput("monomial is not a weight-zero monomial of this degree")
        return int(self.labels[pos])


@lru_cache(maxsize=None)
def orbit_decomposition(N):
    """Orbits of the degree-``N`` weight-zero monomials, sorted by minimal representative."""
    if N % 3:
        raise InvalidInput("orbit decomposition needs a degree divisible by 3")
    return OrbitDecomposition(N)


def format_orbit_row(coeff, min_rep, size):
    """Orbit-table line: ``<coeff>\\t<27 ints>\\t<size>``."""
    return f"{int(coeff)}\t{' '.join(str(int(v)) for v in min_rep)}\t{int(size)}"


def parse_orbit_row(line):
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 3:
        raise InvalidInput(f"bad orbit-table line: {line!r}")
    rep = tuple(int(v) for v in parts[1].split())
    if len(rep) != NVARS:
        raise InvalidInput(f"bad orbit representative: {parts[1]!r}")
    return int(parts[0]), rep, int(parts[2])
