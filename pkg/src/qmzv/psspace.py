"""Partition shuffle spaces PS(k-l, l).

PS(k-l, l) consists of the homogeneous polynomials f of degree k-l in
X_1..X_l, Y_1..Y_l with f|_P = f and f|_Sh_j = 0 for j = 1..l-1, where

    f|_P = f(Y_1+...+Y_l, ..., Y_1+Y_2, Y_1, X_l, X_{l-1}-X_l, ..., X_1-X_2)

(an involution) and f|_Sh_j sums f(X_{s^-1(1)}, ..., Y_{s^-1(l)}) over the
shuffles s of {1..j} with {j+1..l}, i.e. s increasing on both blocks.  Its dimension bounds the number
of algebra generators of weight k and depth l.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import DomainError
from .linalg import Echelon
from .qseries import DEFAULT_PRIME, SECOND_PRIME


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """Polynomial in X_1..X_l, Y_1..Y_l; exponent vectors are (a_1..a_l, b_1..b_l)."""

    l: int
    terms: tuple  # sorted ((exponents, coefficient), ...) with nonzero coefficients

    @classmethod
    def from_dict(cls, l: int, terms: dict) -> "HomogeneousPolynomial":
        clean = {}
        for e, c in terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != 2 * l:
                raise DomainError(f"exponent vector {e} has wrong length for depth {l}")
            c = Fraction(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
        degrees = {sum(e) for e in clean}
        if len(degrees) > 1:
            raise DomainError(f"not homogeneous: degrees {sorted(degrees)}")
        return cls(l, tuple(sorted((e, c) for e, c in clean.items() if c)))

    @classmethod
    def constant(cls, l: int, c=1) -> "HomogeneousPolynomial":
        return cls.from_dict(l, {(0,) * (2 * l): c})

    @classmethod
    def X(cls, i: int, l: int) -> "HomogeneousPolynomial":
        e = [0] * (2 * l)
        e[i - 1] = 1
        return cls.from_dict(l, {tuple(e): 1})

    @classmethod
    def Y(cls, i: int, l: int) -> "HomogeneousPolynomial":
        e = [0] * (2 * l)
        e[l + i - 1] = 1
        return cls.from_dict(l, {tuple(e): 1})

    def as_dict(self) -> dict:
        return dict(self.terms)

    @property
    def degree(self) -> int | None:
        """Total degree, None for the zero polynomial."""
        return sum(self.terms[0][0]) if self.terms else None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        d = self.as_dict()
        for e, c in other.terms:
            d[e] = d.get(e, Fraction(0)) + c
        return HomogeneousPolynomial.from_dict(self.l, d)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, other):
        if not isinstance(other, HomogeneousPolynomial):
            return HomogeneousPolynomial.from_dict(self.l, {e: c * other for e, c in self.terms})
        return HomogeneousPolynomial.from_dict(self.l, _mul(self.as_dict(), other.as_dict()))

    __rmul__ = __mul__

    def __str__(self):
        if not self.terms:
            return "0"
        names = [f"X{i}" for i in range(1, self.l + 1)] + [f"Y{i}" for i in range(1, self.l + 1)]
        parts = []
        for e, c in self.terms:
            mono = "*".join(f"{n}^{a}" if a > 1 else n for n, a in zip(names, e) if a)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


def _unit(l: int, pos: int) -> tuple:
    e = [0] * (2 * l)
    e[pos] = 1
    return tuple(e)


@lru_cache(maxsize=None)
def _partition_images(l: int) -> tuple:
    """Images of X_1..X_l, Y_1..Y_l under |_P as {exponent: int} linear forms."""
    X = lambda i: _unit(l, i - 1)
    Y = lambda i: _unit(l, l + i - 1)
    images = []
    for i in range(1, l + 1):
        # X_i -> Y_1 + ... + Y_{l-i+1}
        images.append({Y(j): 1 for j in range(1, l - i + 2)})
    images.append({X(l): 1})
    for i in range(2, l + 1):
        # Y_i -> X_{l-i+1} - X_{l-i+2}
        images.append({X(l - i + 1): 1, X(l - i + 2): -1})
    return tuple(images)


def _substitute(terms: dict, images: tuple, l: int) -> dict:
    """Replace variable number v by the linear form images[v] in every monomial."""
    powers: dict = {}

    def power(v, a):
        key = (v, a)
        if key not in powers:
            if a == 0:
                powers[key] = {(0,) * (2 * l): 1}
            else:
                powers[key] = _mul(power(v, a - 1), images[v])
        return powers[key]

    out: dict = {}
    for e, c in terms.items():
        acc = {(0,) * (2 * l): c}
        for v, a in enumerate(e):
            if a:
                acc = _mul(acc, power(v, a))
        for m, x in acc.items():
            out[m] = out.get(m, 0) + x
    return {m: x for m, x in out.items() if x}


def partition_substitute(f: HomogeneousPolynomial) -> HomogeneousPolynomial:
    """f|_P."""
    return HomogeneousPolynomial.from_dict(f.l, _substitute(f.as_dict(), _partition_images(f.l), f.l))


@lru_cache(maxsize=None)
def shuffles(j: int, l: int) -> tuple:
    """Permutations sigma (tuples of sigma(0..l-1), zero-based) increasing on
    0..j-1 and on j..l-1."""
    out = []
    for first in combinations(range(l), j):
        rest = [i for i in range(l) if i not in first]
        out.append(tuple(first) + tuple(rest))
    return tuple(out)


def _shuffle_terms(terms: dict, j: int, l: int) -> dict:
    out: dict = {}
    for sigma in shuffles(j, l):
        # slot i holds variable sigma^-1(i), so variable v carries the exponent of slot sigma(v)
        for e, c in terms.items():
            a = [e[sigma[v]] for v in range(l)]
            b = [e[l + sigma[v]] for v in range(l)]
            m = tuple(a + b)
            out[m] = out.get(m, 0) + c
    return {m: x for m, x in out.items() if x}


def shuffle_apply(f: HomogeneousPolynomial, j: int) -> HomogeneousPolynomial:
    """f|_Sh_j: the sum over the C(l, j) shuffle relabelings of the variable pairs."""
    if not 1 <= j <= f.l - 1:
        raise DomainError(f"shuffle index must lie in 1..{f.l - 1}, got {j}")
    return HomogeneousPolynomial.from_dict(f.l, _shuffle_terms(f.as_dict(), j, f.l))


def monomials(degree: int, nvars: int) -> list:
    """Exponent vectors of the given total degree, graded lexicographic (descending)."""
    if nvars == 0:
        return [()] if degree == 0 else []
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials(degree - first, nvars - 1):
            out.append((first,) + rest)
    return out


@dataclass(frozen=True)
class ConstraintSystem:
    """Linear conditions on the coefficient vector of f over the monomial basis."""

    basis: tuple
    rows: tuple  # each row: {column index: integer coefficient}

    @property
    def n_cols(self) -> int:
        return len(self.basis)


def constraint_system(k: int, l: int) -> ConstraintSystem:
    """Rows for (f|_P - f) = 0 and f|_Sh_j = 0 (j = 1..l-1), one per output monomial."""
    if l < 1 or k < l:
        raise DomainError(f"need k >= l >= 1, got k={k}, l={l}")
    basis = tuple(monomials(k - l, 2 * l))
    images = _partition_images(l)
    rows: dict = {}
    for col, m in enumerate(basis):
        image = _substitute({m: 1}, images, l)
        image[m] = image.get(m, 0) - 1
        for out, c in image.items():
            if c:
                rows.setdefault(("P", out), {})[col] = c
        for j in range(1, l):
            for out, c in _shuffle_terms({m: 1}, j, l).items():
                rows.setdefault((j, out), {})[col] = c
    ordered = tuple(rows[key] for key in sorted(rows, key=lambda x: (str(x[0]), x[1])))
    return ConstraintSystem(basis, ordered)


def _rank_exact(system: ConstraintSystem) -> int:
    if not system.rows:
        return 0
    data = {i: {c: QQ(int(v)) for c, v in row.items()} for i, row in enumerate(system.rows)}
    M = DomainMatrix(data, (len(system.rows), system.n_cols), QQ)
    return M.rank()


def _rank_modp(system: ConstraintSystem, p: int) -> int:
    if not system.rows:
        return 0
    dense = np.zeros((len(system.rows), system.n_cols), dtype=np.int64)
    for i, row in enumerate(system.rows):
        for c, v in row.items():
            dense[i, c] = v % p
    ech = Echelon(system.n_cols, p)
    ech.add_rows(dense)
    return ech.rank


def ps_dimension(k: int, l: int, ring: str = "exact", primes=(DEFAULT_PRIME, SECOND_PRIME)) -> int:
    """dim PS(k-l, l) as monomial count minus constraint rank.

    ``ring="exact"`` eliminates over Q (sparse, and the faster of the two
    at these sizes); ``ring="modp"`` uses the given primes and requires
    them to agree.
    """
    if l < 1 or k < l:
        raise DomainError(f"need k >= l >= 1, got k={k}, l={l}")
    system = constraint_system(k, l)
    if ring == "exact":
        return system.n_cols - _rank_exact(system)
    if ring == "modp":
        ranks = {_rank_modp(system, p) for p in primes}
        if len(ranks) != 1:
            raise ArithmeticError(f"ranks differ across primes {primes}: {ranks}")
        return system.n_cols - ranks.pop()
    raise DomainError(f"unknown ring {ring!r}")


def _reference_rows() -> dict:
    rows = {
        1: (1, [1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9]),
        2: (2, [0, 0, 1, 0, 2, 0, 8, 0, 14, 0, 23, 0, 38, 0, 58, 0]),
        3: (3, [0, 0, 1, 0, 3, 0, 9, 0, 27, 0, 62, 0, 125, 0, 238]),
        4: (4, [0, 0, 1, 0, 3, 0, 12, 0, 37]),
        5: (5, [0, 0, 1, 0, 4, 0, 15]),
        6: (6, [0, 0, 1]),
    }
    return {(k0 + i, l): v for l, (k0, vals) in rows.items() for i, v in enumerate(vals)}


# published p_{k,l} values, keyed (k, l)
REFERENCE_PS_DIMENSIONS = _reference_rows()
