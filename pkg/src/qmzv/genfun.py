"""Truncated bivariate generating series and the dimension conjectures.

Series in x (weight) and y (depth) are stored as dense arrays of exact
integers or Fractions, ``coeff[k, l]`` for x^k y^l with k <= Kmax and
l <= Lmax.  Univariate series are carried with Lmax = 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .errors import DomainError, MissingEntry, NonUnitConstant
from .linalg import B_NUM, G_NUM, DimTable

DEFAULT_CAPS = (30, 15)


class BivariateSeries:
    """Exact series sum c[k, l] x^k y^l truncated at x^Kmax, y^Lmax."""

    __slots__ = ("coeff",)

    def __init__(self, coeff):
        arr = np.array(coeff, dtype=object)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        object.__setattr__(self, "coeff", arr)

    def __setattr__(self, name, value):
        raise AttributeError("BivariateSeries is immutable")

    @classmethod
    def zero(cls, Kmax: int, Lmax: int = 0) -> "BivariateSeries":
        arr = np.empty((Kmax + 1, Lmax + 1), dtype=object)
        arr[:] = 0
        return cls(arr)

    @classmethod
    def monomial(cls, k: int, l: int, Kmax: int, Lmax: int = 0, c=1) -> "BivariateSeries":
        out = cls.zero(Kmax, Lmax).coeff
        if k <= Kmax and l <= Lmax:
            out[k, l] = c
        return cls(out)

    @classmethod
    def one(cls, Kmax: int, Lmax: int = 0) -> "BivariateSeries":
        return cls.monomial(0, 0, Kmax, Lmax)

    @classmethod
    def from_poly(cls, terms: dict, Kmax: int, Lmax: int = 0) -> "BivariateSeries":
        """From {k: c} (pure x) or {(k, l): c}."""
        out = cls.zero(Kmax, Lmax).coeff
        for key, c in terms.items():
            k, l = key if isinstance(key, tuple) else (key, 0)
            if k <= Kmax and l <= Lmax:
                out[k, l] += c
        return cls(out)

    @classmethod
    def from_table(cls, table: DimTable, Kmax: int, Lmax: int) -> "BivariateSeries":
        out = cls.zero(Kmax, Lmax).coeff
        for k in range(Kmax + 1):
            for l in range(Lmax + 1):
                if (k, l) not in table:
                    raise MissingEntry(f"table lacks ({k}, {l})")
                out[k, l] = table[(k, l)]
        return cls(out)

    @property
    def Kmax(self) -> int:
        return self.coeff.shape[0] - 1

    @property
    def Lmax(self) -> int:
        return self.coeff.shape[1] - 1

    @property
    def caps(self) -> tuple:
        return self.Kmax, self.Lmax

    def __getitem__(self, key):
        return self.coeff[key]

    def _check(self, other):
        if not isinstance(other, BivariateSeries):
            raise TypeError(f"expected BivariateSeries, got {type(other).__name__}")
        if other.caps != self.caps:
            raise DomainError(f"caps differ: {self.caps} vs {other.caps}")

    def __add__(self, other):
        self._check(other)
        return BivariateSeries(self.coeff + other.coeff)

    def __sub__(self, other):
        self._check(other)
        return BivariateSeries(self.coeff - other.coeff)

    def __neg__(self):
        return BivariateSeries(-self.coeff)

    def __mul__(self, other):
        if not isinstance(other, BivariateSeries):
            return BivariateSeries(self.coeff * other)
        self._check(other)
        K, L = self.caps
        out = BivariateSeries.zero(K, L).coeff
        b = other.coeff
        for k, l in zip(*np.nonzero(self.coeff != 0)):
            out[k:, l:] += self.coeff[k, l] * b[: K + 1 - k, : L + 1 - l]
        return BivariateSeries(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = BivariateSeries.one(*self.caps)
        for _ in range(e):
            out = out * self
        return out

    def inverse(self) -> "BivariateSeries":
        """1/self by the coefficient recursion; needs constant term 1 or -1."""
        c0 = self.coeff[0, 0]
        if c0 == 0:
            raise NonUnitConstant("constant term is zero")
        K, L = self.caps
        a = self.coeff
        inv = BivariateSeries.zero(K, L).coeff
        inv[0, 0] = c0 if c0 in (1, -1) else 1 / Fraction(c0)
        nz = [(i, j) for i, j in zip(*np.nonzero(a != 0)) if (i, j) != (0, 0)]
        for k in range(K + 1):
            for l in range(L + 1):
                if k == 0 and l == 0:
                    continue
                acc = 0
                for i, j in nz:
                    if i <= k and j <= l:
                        acc += a[i, j] * inv[k - i, l - j]
                inv[k, l] = -acc * inv[0, 0]
        return BivariateSeries(inv)

    def __truediv__(self, other):
        return self * other.inverse()

    def at_y1(self) -> list:
        """Coefficients of x^k after setting y = 1 (sums along each x-row)."""
        return [sum(self.coeff[k, :]) for k in range(self.Kmax + 1)]

    def x_part(self, l: int = 0) -> list:
        return list(self.coeff[:, l])

    def with_caps(self, Kmax: int, Lmax: int) -> "BivariateSeries":
        out = BivariateSeries.zero(Kmax, Lmax).coeff
        k, l = min(Kmax, self.Kmax), min(Lmax, self.Lmax)
        out[: k + 1, : l + 1] = self.coeff[: k + 1, : l + 1]
        return BivariateSeries(out)

    def lift(self, Lmax: int, y_power: int = 0) -> "BivariateSeries":
        """Place a univariate series at y^y_power of a series with y-cap Lmax."""
        out = BivariateSeries.zero(self.Kmax, Lmax).coeff
        if y_power <= Lmax:
            out[:, y_power] = self.coeff[:, 0]
        return BivariateSeries(out)

    def __eq__(self, other):
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        return self.caps == other.caps and bool(np.all(self.coeff == other.coeff))

    def tolist(self) -> list:
        return [[c for c in row] for row in self.coeff]

    def __repr__(self):
        return f"BivariateSeries(caps={self.caps})"


def rational_series(num: dict, den: dict, K: int) -> list:
    """Expand num(x)/den(x) through x^K with the recurrence given by den.

    ``num``, ``den`` map exponents to integer coefficients; den[0] must be 1.
    """
    if den.get(0, 0) != 1:
        raise NonUnitConstant("denominator must have constant term 1")
    c = [0] * (K + 1)
    for k in range(K + 1):
        acc = num.get(k, 0)
        for i, d in den.items():
            if 0 < i <= k:
                acc -= d * c[k - i]
        c[k] = acc
    return c


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def _uni(coeffs: list, Kmax: int) -> BivariateSeries:
    return BivariateSeries([[c] for c in coeffs[: Kmax + 1]])


def dim_cusp_forms(K: int) -> list:
    """dim S_k(SL_2(Z)) for k = 0..K, read off x^12/((1-x^4)(1-x^6))."""
    return rational_series({12: 1}, _poly_mul({0: 1, 4: -1}, {0: 1, 6: -1}), K)


def dim_modular_forms(K: int) -> list:
    """dim M_k = dim S_k + [k even, k >= 4] + [k = 0]."""
    S = dim_cusp_forms(K)
    return [S[k] + (1 if (k >= 4 and k % 2 == 0) or k == 0 else 0) for k in range(K + 1)]


class NamedSeries(enum.Enum):
    ZAGIER = "Zagier"
    BK = "BK"
    CONJ13I = "Conj13i"
    CONJ13II = "Conj13ii"
    OKOUNKOV_DIM = "OkounkovDim"
    TM = "TM"
    E2 = "E2"
    O1 = "O1"
    O3 = "O3"
    D = "D"
    S = "S"
    MSQUARED = "MSquared"
    SSQUARED = "SSquared"
    QMFREE = "QMFree"


def _univariate(name: NamedSeries, K: int) -> list:
    one_minus_x2 = {0: 1, 2: -1}
    if name is NamedSeries.D:
        return rational_series({0: 1}, one_minus_x2, K)
    if name is NamedSeries.E2:
        return rational_series({2: 1}, one_minus_x2, K)
    if name is NamedSeries.O1:
        return rational_series({1: 1}, one_minus_x2, K)
    if name is NamedSeries.O3:
        return rational_series({3: 1}, one_minus_x2, K)
    if name is NamedSeries.S:
        return dim_cusp_forms(K)
    if name is NamedSeries.MSQUARED:
        return [m * m for m in dim_modular_forms(K)]
    if name is NamedSeries.SSQUARED:
        return [s * s for s in dim_cusp_forms(K)]
    if name is NamedSeries.QMFREE:
        den = _poly_mul(_poly_mul({0: 1, 2: -1}, {0: 1, 4: -1}), {0: 1, 6: -1})
        return rational_series({0: 1}, den, K)
    if name is NamedSeries.ZAGIER:
        return rational_series({0: 1}, {0: 1, 2: -1, 3: -1}, K)
    if name is NamedSeries.CONJ13I:
        den = {0: 1, 1: -1, 2: -1, 3: -1, 6: 1, 7: 1, 8: 1, 9: 1}
        return rational_series({0: 1}, den, K)
    if name is NamedSeries.OKOUNKOV_DIM:
        den = {0: 1, 2: -1, 3: -1, 4: -1, 5: -1, 8: 1, 9: 1, 10: 1, 11: 1, 12: 1}
        return rational_series({0: 1}, den, K)
    raise DomainError(f"{name.value} is not univariate")


def _y_poly(parts: dict, K: int, L: int) -> BivariateSeries:
    """sum_l parts[l](x) y^l from univariate coefficient lists."""
    out = BivariateSeries.zero(K, L).coeff
    for l, coeffs in parts.items():
        if l <= L:
            for k in range(K + 1):
                out[k, l] += coeffs[k]
    return BivariateSeries(out)


def _times(a: list, b: list) -> list:
    K = len(a) - 1
    out = [0] * (K + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(K + 1 - i):
                out[i + j] += x * b[j]
    return out


def _drop_constant(a: list) -> list:
    return [0] + list(a[1:])


def tm_numerator(K: int, L: int) -> BivariateSeries:
    """tM(x, y) = 1 + D(x) E_2(x) y + D(x) S(x) y^2."""
    D = _univariate(NamedSeries.D, K)
    one = [1] + [0] * K
    return _y_poly(
        {0: one, 1: _times(D, _univariate(NamedSeries.E2, K)), 2: _times(D, _univariate(NamedSeries.S, K))},
        K,
        L,
    )


def conj13ii_denominator(K: int, L: int) -> BivariateSeries:
    """1 - A_1 y + A_2 y^2 - A_3 y^3 - A_4 y^4 + A_5 y^5."""
    D = _univariate(NamedSeries.D, K)
    O1 = _univariate(NamedSeries.O1, K)
    S = _univariate(NamedSeries.S, K)
    A1 = _times(D, O1)
    # the M_k^2 and S_k^2 sums run over k >= 1
    A2 = _times(D, _drop_constant(_univariate(NamedSeries.MSQUARED, K)))
    A3 = _times(O1, S)
    A4 = _times(D, _drop_constant(_univariate(NamedSeries.SSQUARED, K)))
    A5 = A3
    neg = lambda a: [-x for x in a]
    one = [1] + [0] * K
    return _y_poly({0: one, 1: neg(A1), 2: A2, 3: neg(A3), 4: neg(A4), 5: A5}, K, L)


def expand(name, Kmax: int = DEFAULT_CAPS[0], Lmax: int = DEFAULT_CAPS[1]) -> BivariateSeries:
    """Exact truncated expansion of one of the named series."""
    name = NamedSeries(name)
    if Kmax < 0 or Lmax < 0:
        raise DomainError("caps must be non-negative")
    if name is NamedSeries.TM:
        return tm_numerator(Kmax, Lmax)
    if name is NamedSeries.BK:
        E2 = _univariate(NamedSeries.E2, Kmax)
        O3 = _univariate(NamedSeries.O3, Kmax)
        S = _univariate(NamedSeries.S, Kmax)
        one = [1] + [0] * Kmax
        num = _y_poly({0: one, 1: E2}, Kmax, Lmax)
        den = _y_poly({0: one, 1: [-x for x in O3], 2: S, 4: [-x for x in S]}, Kmax, Lmax)
        return num / den
    if name is NamedSeries.CONJ13II:
        return tm_numerator(Kmax, Lmax) / conj13ii_denominator(Kmax, Lmax)
    return _uni(_univariate(name, Kmax), Kmax).lift(Lmax)


# ---------------------------------------------------------------------------
# identity checks


@dataclass
class CheckReport:
    name: str
    passed: bool
    detail: str = ""
    first_discrepancy: dict | None = None
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "first_discrepancy": self.first_discrepancy,
            "data": self.data,
        }


def _compare(name: str, lhs: list, rhs: list, label: str = "") -> CheckReport:
    for k, (a, b) in enumerate(zip(lhs, rhs)):
        if a != b:
            return CheckReport(
                name, False, f"{label}differ at x^{k}", {"k": k, "lhs": str(a), "rhs": str(b)}
            )
    return CheckReport(name, True, f"{label}agree through x^{len(lhs) - 1}")


def check_identity_msq(K: int) -> CheckReport:
    """sum dim M_k^2 x^k against (1 + x^12)/((1-x^4)(1-x^6)(1-x^12))."""
    if K < 0:
        raise DomainError("K must be non-negative")
    lhs = _univariate(NamedSeries.MSQUARED, K)
    den = _poly_mul(_poly_mul({0: 1, 4: -1}, {0: 1, 6: -1}), {0: 1, 12: -1})
    rhs = rational_series({0: 1, 12: 1}, den, K)
    report = _compare("msq", lhs, rhs)
    report.data = {"lhs": lhs}
    return report


def check_y1_bk(K: int) -> CheckReport:
    """BK(x, 1) = Zagier(x) through x^K."""
    if K < 0:
        raise DomainError("K must be non-negative")
    # every y in these series comes with at least x^1, so Lmax = K is exact at y = 1
    bk = expand(NamedSeries.BK, K, K).at_y1()
    return _compare("y1-bk", bk, _univariate(NamedSeries.ZAGIER, K), "BK(x,1) vs Zagier: ")


def check_y1_conj13(K: int) -> CheckReport:
    """Conj13ii(x, 1) = Conj13i(x) through x^K."""
    if K < 0:
        raise DomainError("K must be non-negative")
    c2 = expand(NamedSeries.CONJ13II, K, K).at_y1()
    return _compare("y1-conj13", c2, _univariate(NamedSeries.CONJ13I, K), "Conj13ii(x,1) vs Conj13i: ")


def check_y1_reductions(K: int) -> CheckReport:
    """Both y = 1 reductions through x^K."""
    first, second = check_y1_bk(K), check_y1_conj13(K)
    return CheckReport(
        "y1-reductions",
        first.passed and second.passed,
        f"{first.detail}; {second.detail}",
        first.first_discrepancy or second.first_discrepancy,
        {"bk": first.passed, "conj13": second.passed},
    )


def check_okounkov_factorization(K: int) -> CheckReport:
    """Both displayed factorizations through tM(x, 1)."""
    if K < 0:
        raise DomainError("K must be non-negative")
    D = _univariate(NamedSeries.D, K)
    S = _univariate(NamedSeries.S, K)
    tm1 = tm_numerator(K, 2).at_y1()
    # Okounkov: tM(x,1) / (1 - D O_3 + 2 D S)
    den = [-a + 2 * b for a, b in zip(_times(D, _univariate(NamedSeries.O3, K)), _times(D, S))]
    den[0] += 1
    ok_rhs = _times(tm1, _inverse_uni(den))
    ok = _compare("okounkov", _univariate(NamedSeries.OKOUNKOV_DIM, K), ok_rhs, "Okounkov: ")
    # Conj13i: tM(x,1) / (1 - D O_1 + D (E_4 + 2 S)), E_4 = x^4/(1-x^2)
    E4 = rational_series({4: 1}, {0: 1, 2: -1}, K)
    den = [
        -a + b
        for a, b in zip(
            _times(D, _univariate(NamedSeries.O1, K)), _times(D, [e + 2 * s for e, s in zip(E4, S)])
        )
    ]
    den[0] += 1
    c_rhs = _times(tm1, _inverse_uni(den))
    c = _compare("conj13i", _univariate(NamedSeries.CONJ13I, K), c_rhs, "Conj13i: ")
    return CheckReport(
        "okounkov-factorization",
        ok.passed and c.passed,
        f"{ok.detail}; {c.detail}",
        ok.first_discrepancy or c.first_discrepancy,
        {"okounkov": ok.passed, "conj13i": c.passed},
    )


def _inverse_uni(a: list) -> list:
    return _uni(a, len(a) - 1).inverse().x_part()


# ---------------------------------------------------------------------------
# generator and Lie-coefficient extraction


def _graded_order(Kmax: int, Lmax: int):
    cells = [(k, l) for k in range(1, Kmax + 1) for l in range(1, Lmax + 1)]
    return sorted(cells, key=lambda kl: (kl[0] + kl[1], kl[0]))


def _one_minus_monomial_power(k: int, l: int, e: int, Kmax: int, Lmax: int) -> BivariateSeries:
    """(1 - x^k y^l)^e for any integer e."""
    out = BivariateSeries.zero(Kmax, Lmax).coeff
    i = 0
    while i * k <= Kmax and i * l <= Lmax:
        if e >= 0:
            c = (-1) ** i * comb(e, i) if i <= e else 0
        else:
            c = comb(-e + i - 1, i)
        out[i * k, i * l] = c
        i += 1
    return BivariateSeries(out)


def _as_series(gr, Kmax, Lmax) -> BivariateSeries:
    if isinstance(gr, BivariateSeries):
        return gr.with_caps(Kmax, Lmax)
    return BivariateSeries.from_table(gr, Kmax, Lmax)


def extract_generators_free(gr, numerator: BivariateSeries, Kmax: int, Lmax: int) -> DimTable:
    """g_{k,l} with F = numerator * prod (1 - x^k y^l)^(-g_{k,l}).

    Peeled in order of (k + l, k).  Negative values are kept and flagged in
    ``meta["violations"]``; so are leftover coefficients on the axes.
    """
    F = _as_series(gr, Kmax, Lmax)
    num = numerator.with_caps(Kmax, Lmax)
    if F[0, 0] != 1 or num[0, 0] != 1:
        raise NonUnitConstant("gr_{0,0} and the numerator constant term must be 1")
    R = F * num.inverse()
    g: dict = {}
    violations = []
    for k, l in _graded_order(Kmax, Lmax):
        e = R[k, l]
        g[(k, l)] = e
        if e != 0:
            R = R * _one_minus_monomial_power(k, l, e, Kmax, Lmax)
        if e < 0 or (isinstance(e, Fraction) and e.denominator != 1):
            violations.append({"k": k, "l": l, "g": str(e)})
    axis = [
        {"k": k, "l": l, "residual": str(R[k, l])}
        for k in range(Kmax + 1)
        for l in range(Lmax + 1)
        if (k == 0) != (l == 0) and R[k, l] != 0
    ]
    return DimTable(g, G_NUM, {"violations": violations, "axis_residuals": axis})


def extract_lie_b(gr, numerator: BivariateSeries, Kmax: int, Lmax: int) -> DimTable:
    """b_{k,l} with F * (1 - sum b_{k,l} x^k y^l) = numerator."""
    F = _as_series(gr, Kmax, Lmax)
    num = numerator.with_caps(Kmax, Lmax)
    if F[0, 0] != 1 or num[0, 0] != 1:
        raise NonUnitConstant("gr_{0,0} and the numerator constant term must be 1")
    # back-substitution: 1 - B = num / F, solved cell by cell in graded order
    quotient = num * F.inverse()
    b = {(k, l): -quotient[k, l] for k, l in _graded_order(Kmax, Lmax)}
    violations = [
        {"k": k, "l": l, "b": str(v)}
        for (k, l), v in b.items()
        if isinstance(v, Fraction) and v.denominator != 1
    ]
    axis = [
        {"k": k, "l": l, "residual": str(quotient[k, l])}
        for k in range(Kmax + 1)
        for l in range(Lmax + 1)
        if (k == 0) != (l == 0) and quotient[k, l] != 0
    ]
    return DimTable(b, B_NUM, {"violations": violations, "axis_residuals": axis})


def synthesize_free(g: dict, numerator: BivariateSeries) -> BivariateSeries:
    """numerator * prod (1 - x^k y^l)^(-g_{k,l})."""
    K, L = numerator.caps
    out = numerator
    for (k, l), e in g.items():
        if e and k >= 1 and l >= 1:
            out = out * _one_minus_monomial_power(k, l, -e, K, L)
    return out


def synthesize_lie(b: dict, numerator: BivariateSeries) -> BivariateSeries:
    """numerator / (1 - sum b_{k,l} x^k y^l)."""
    K, L = numerator.caps
    den = BivariateSeries.one(K, L).coeff
    for (k, l), v in b.items():
        if k <= K and l <= L:
            den[k, l] -= v
    return numerator / BivariateSeries(den)


def expected_lie_b(Kmax: int, Lmax: int) -> DimTable:
    """b_{k,l} predicted by the Conj13ii denominator."""
    den = conj13ii_denominator(Kmax, Lmax)
    return DimTable({(k, l): -den[k, l] for k, l in _graded_order(Kmax, Lmax)}, B_NUM)


def depth1_generator_counts(K: int) -> list:
    """Coefficients of x/(1-x^2)^2: one generator per odd bracket and derivative."""
    return rational_series({1: 1}, {0: 1, 2: -2, 4: 1}, K)


def upper_bound_series(ps: DimTable, K: int) -> list:
    """Coefficient-wise upper bound for sum dim Fil_k^W x^k through x^K.

    1/(1-x) * 1/((1-x^2)(1-x^4)(1-x^6)) * prod_k (1-x^k)^(-c_k)
    * prod_{k,l >= 2} (1-x^k)^(-p_{k,l}), with c_k the coefficients of
    x/(1-x^2)^2.
    """
    if K < 0:
        raise DomainError("K must be non-negative")
    out = _uni(rational_series({0: 1}, {0: 1, 1: -1}, K), K)
    out = out * _uni(_univariate(NamedSeries.QMFREE, K), K)
    for k, c in enumerate(depth1_generator_counts(K)):
        if c:
            out = out * _one_minus_monomial_power(k, 0, -c, K, 0)
    for k in range(2, K + 1):
        for l in range(2, k + 1):
            if (k, l) not in ps:
                raise MissingEntry(f"p_{{{k},{l}}} needed for the bound through x^{K}")
            e = ps[(k, l)]
            if e:
                out = out * _one_minus_monomial_power(k, 0, -e, K, 0)
    return out.x_part()
