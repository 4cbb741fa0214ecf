"""Exact coefficient rings and truncated q-series arithmetic.

Two rings are supported: the rationals (coefficients held as
:class:`fractions.Fraction` in object arrays) and prime fields F_p
(coefficients held as reduced residues in ``int64`` arrays).  A
:class:`TruncatedQSeries` stores the coefficients of q^0, ..., q^N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

import numpy as np
from sympy import isprime

from .errors import DomainError, FactorialNotInvertible, RingMismatch, TruncationMismatch

DEFAULT_PRIME = 2147483647
SECOND_PRIME = 2147483629
MIN_PRIME = 2**20

RATIONAL = "rational"
PRIME = "prime"


@dataclass(frozen=True)
class RingSpec:
    """Coefficient ring: ``RingSpec()`` is Q, ``RingSpec(PRIME, p)`` is F_p."""

    kind: str = RATIONAL
    prime: int | None = None

    def __post_init__(self):
        if self.kind == RATIONAL:
            if self.prime is not None:
                raise DomainError("the rational ring takes no prime")
        elif self.kind == PRIME:
            p = self.prime
            if p is None or p <= MIN_PRIME or p >= 2**31 or not isprime(p):
                # residues are multiplied in int64, so p must stay below 2^31
                raise DomainError(f"need a prime 2^20 < p < 2^31, got {p}")
        else:
            raise DomainError(f"unknown ring kind {self.kind!r}")

    @classmethod
    def rational(cls) -> "RingSpec":
        return cls(RATIONAL)

    @classmethod
    def prime_field(cls, p: int = DEFAULT_PRIME) -> "RingSpec":
        return cls(PRIME, p)

    @property
    def is_prime(self) -> bool:
        return self.kind == PRIME

    @property
    def dtype(self):
        return np.int64 if self.is_prime else object

    def __str__(self):
        return f"GF({self.prime})" if self.is_prime else "QQ"

    def element(self, x):
        """Map an int or Fraction into the ring."""
        x = Fraction(x)
        if not self.is_prime:
            return x
        p = self.prime
        if x.denominator % p == 0:
            raise FactorialNotInvertible(f"denominator {x.denominator} vanishes mod {p}")
        return x.numerator * pow(x.denominator, -1, p) % p

    def inverse(self, x):
        if self.is_prime:
            x = int(x) % self.prime
            if x == 0:
                raise FactorialNotInvertible(f"{x} is not invertible mod {self.prime}")
            return pow(x, -1, self.prime)
        return 1 / Fraction(x)

    def zeros(self, n: int) -> np.ndarray:
        if self.is_prime:
            return np.zeros(n, dtype=np.int64)
        out = np.empty(n, dtype=object)
        out[:] = Fraction(0)
        return out

    def array(self, values: Iterable) -> np.ndarray:
        values = list(values)
        out = self.zeros(len(values))
        for i, v in enumerate(values):
            out[i] = self.element(v)
        return out

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if self.is_prime:
            return arr % self.prime
        return arr

    def to_fraction(self, x) -> Fraction:
        """Exact value for Q; the canonical residue in [0, p) for F_p."""
        return Fraction(x) if not self.is_prime else Fraction(int(x))


class TruncatedQSeries:
    """A q-series known exactly through q^N.

    Instances are immutable; arithmetic requires the same ring and the same
    truncation order on both sides.
    """

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: RingSpec, coeffs):
        values = [int(c) if isinstance(c, np.integer) else c for c in coeffs]
        if not values:
            raise DomainError("coefficient vector must be non-empty")
        arr = ring.array(values)
        arr.flags.writeable = False
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedQSeries is immutable")

    @classmethod
    def _wrap(cls, ring: RingSpec, arr: np.ndarray) -> "TruncatedQSeries":
        # trusted constructor: arr already reduced and of the right dtype
        self = object.__new__(cls)
        arr.flags.writeable = False
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "coeffs", arr)
        return self

    @classmethod
    def zero(cls, ring: RingSpec, N: int) -> "TruncatedQSeries":
        return cls._wrap(ring, ring.zeros(N + 1))

    @classmethod
    def one(cls, ring: RingSpec, N: int) -> "TruncatedQSeries":
        arr = ring.zeros(N + 1)
        arr[0] = ring.element(1)
        return cls._wrap(ring, arr)

    @classmethod
    def from_values(cls, ring: RingSpec, values: Sequence, N: int | None = None):
        """Build from exact values (ints/Fractions), padding with zeros up to N."""
        N = len(values) - 1 if N is None else N
        arr = ring.zeros(N + 1)
        for i, v in enumerate(values[: N + 1]):
            arr[i] = ring.element(v)
        return cls._wrap(ring, arr)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def tolist(self) -> list:
        if self.ring.is_prime:
            return [int(c) for c in self.coeffs]
        return list(self.coeffs)

    def _check(self, other: "TruncatedQSeries"):
        if not isinstance(other, TruncatedQSeries):
            raise TypeError(f"expected TruncatedQSeries, got {type(other).__name__}")
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")
        if other.N != self.N:
            raise TruncationMismatch(f"N={self.N} vs N={other.N}")

    def __add__(self, other):
        self._check(other)
        return TruncatedQSeries._wrap(self.ring, self.ring.reduce(self.coeffs + other.coeffs))

    def __sub__(self, other):
        self._check(other)
        return TruncatedQSeries._wrap(self.ring, self.ring.reduce(self.coeffs - other.coeffs))

    def __neg__(self):
        return TruncatedQSeries._wrap(self.ring, self.ring.reduce(-self.coeffs))

    def scale(self, c) -> "TruncatedQSeries":
        c = self.ring.element(int(c) if isinstance(c, np.integer) else c)
        return TruncatedQSeries._wrap(self.ring, self.ring.reduce(self.coeffs * c))

    def __mul__(self, other):
        if not isinstance(other, TruncatedQSeries):
            return self.scale(other)
        self._check(other)
        ring, N = self.ring, self.N
        out = ring.zeros(N + 1)
        b = other.coeffs
        for i in np.flatnonzero(self.coeffs):
            out[i:] = ring.reduce(out[i:] + self.coeffs[i] * b[: N + 1 - i])
        return TruncatedQSeries._wrap(ring, out)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, TruncatedQSeries):
            return NotImplemented
        return self.ring == other.ring and self.N == other.N and bool(
            np.all(self.coeffs == other.coeffs)
        )

    def __hash__(self):
        return hash((self.ring, tuple(self.tolist())))

    def truncate(self, N: int) -> "TruncatedQSeries":
        """Restrict to a lower order (explicit re-truncation only)."""
        if N > self.N:
            raise TruncationMismatch(f"cannot extend N={self.N} to {N}")
        return TruncatedQSeries._wrap(self.ring, self.coeffs[: N + 1].copy())

    def __repr__(self):
        head = ", ".join(str(c) for c in self.tolist()[:8])
        more = ", ..." if self.N >= 8 else ""
        return f"TruncatedQSeries({self.ring}, N={self.N}, [{head}{more}])"


def series_arith(a: TruncatedQSeries, b, op: str) -> TruncatedQSeries:
    """Dispatch ``add``/``sub``/``mul``/``scale``; for ``scale`` b is a ring scalar."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        if not isinstance(b, TruncatedQSeries):
            raise TypeError("mul needs a series; use op='scale' for scalars")
        return a * b
    if op == "scale":
        return a.scale(b)
    raise DomainError(f"unknown op {op!r}")


def q_derivative(a: TruncatedQSeries) -> TruncatedQSeries:
    """Apply q d/dq: the coefficient of q^n is multiplied by n."""
    ring = a.ring
    n = np.arange(a.N + 1, dtype=np.int64)
    if not ring.is_prime:
        n = n.astype(object)
    return TruncatedQSeries._wrap(ring, ring.reduce(a.coeffs * n))


@dataclass(frozen=True)
class RationalPolynomial:
    """Polynomial in t with rational coefficients, ``coeffs[i]`` for t^i."""

    coeffs: tuple = field(default=())

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def monomial(cls, degree: int, c=1) -> "RationalPolynomial":
        return cls((0,) * degree + (c,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPolynomial(tuple(self[i] + other[i] for i in range(n)))

    def __sub__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPolynomial(tuple(self[i] - other[i] for i in range(n)))

    def __mul__(self, other):
        if not isinstance(other, RationalPolynomial):
            return RationalPolynomial(tuple(c * Fraction(other) for c in self.coeffs))
        if not self.coeffs or not other.coeffs:
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = RationalPolynomial((1,))
        for _ in range(e):
            out = out * self
        return out

    def __call__(self, t):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def over_one_minus_t(self, s: int, order: int) -> list[Fraction]:
        """Coefficients of Q(t) / (1 - t)^s through t^order."""
        if s < 0:
            raise DomainError(f"exponent must be >= 0, got {s}")
        out = [Fraction(0)] * (order + 1)
        for i, c in enumerate(self.coeffs):
            if c == 0 or i > order:
                continue
            if s == 0:
                out[i] += c
                continue
            for m in range(order + 1 - i):
                out[i + m] += c * comb(m + s - 1, s - 1)
        return out

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*t^{i}")
        return " + ".join(terms)


ONE_MINUS_T = RationalPolynomial((1, -1))


def eulerian_numerator(s: int) -> RationalPolynomial:
    """Return t*P_{s-1}(t), the numerator with t P_{s-1}(t)/(1-t)^s = sum_d d^(s-1) t^d."""
    if s < 1:
        raise DomainError(f"s must be >= 1, got {s}")
    # (1-t)^s * sum_{d=1}^{s} d^(s-1) t^d, kept through degree s
    powers = RationalPolynomial(tuple([0] + [d ** (s - 1) for d in range(1, s + 1)]))
    full = ONE_MINUS_T**s * powers
    return RationalPolynomial(full.coeffs[: s + 1])


def divisor_power_sums(k: int, N: int) -> list[int]:
    """sigma_k(n) for n = 0..N (sigma_k(0) := 0)."""
    sig = [0] * (N + 1)
    for d in range(1, N + 1):
        dk = d**k
        for n in range(d, N + 1, d):
            sig[n] += dk
    return sig


def sigma_series(k: int, N: int, ring: RingSpec) -> TruncatedQSeries:
    """sum_{n=1}^N sigma_{k-1}(n)/(k-1)! q^n, i.e. the depth-one bracket [k]."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    scale = Fraction(1, factorial(k - 1))
    sig = divisor_power_sums(k - 1, N)
    return TruncatedQSeries.from_values(ring, [scale * v for v in sig], N)
