"""Bi-bracket indices, q-analogue specifications and their q-expansions.

The bi-bracket with index (s_1..s_l; r_1..r_l) is

    sum_{u_1 > ... > u_l > 0, v_i > 0} prod_j u_j^r_j / r_j! * v_j^(s_j-1) / (s_j-1)! * q^(u_j v_j).

Expansions are produced by sweeping the outer summation bound ``u`` from
1 to N.  Writing an index as a head (s, r) followed by a tail T, the
truncated series obey

    A_I(u) = A_I(u-1) + u^r/r! * (sum_v v^(s-1)/(s-1)! q^(uv)) * A_T(u-1),

so every index of a batch advances one step per ``u`` from a snapshot of
its tail.  The sweep runs on integer-scaled series (the factorials are
divided out once at the end) so the same code serves Q and F_p.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .errors import BasisViolation, DomainError, FactorialNotInvertible, SpecViolation
from .qseries import (
    ONE_MINUS_T,
    RationalPolynomial,
    RingSpec,
    TruncatedQSeries,
    eulerian_numerator,
    sigma_series,
)


@dataclass(frozen=True)
class BiBracketIndex:
    s: tuple = ()
    r: tuple = ()

    def __post_init__(self):
        s, r = tuple(int(x) for x in self.s), tuple(int(x) for x in self.r)
        if len(s) != len(r):
            raise DomainError(f"s and r differ in length: {s} vs {r}")
        if any(x < 1 for x in s) or any(x < 0 for x in r):
            raise DomainError(f"need s_i >= 1 and r_i >= 0, got {s}; {r}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "r", r)

    @classmethod
    def bracket(cls, *s: int) -> "BiBracketIndex":
        return cls(tuple(s), (0,) * len(s))

    @property
    def depth(self) -> int:
        return len(self.s)

    @property
    def weight(self) -> int:
        return sum(self.s) + sum(self.r)

    @property
    def tail(self) -> "BiBracketIndex":
        return BiBracketIndex(self.s[1:], self.r[1:])

    @property
    def head(self) -> tuple:
        return self.s[0], self.r[0]

    @property
    def is_bracket(self) -> bool:
        return not any(self.r)

    def scale_factor(self) -> int:
        """prod (s_j - 1)! r_j!, the common denominator of the expansion."""
        out = 1
        for s, r in zip(self.s, self.r):
            out *= factorial(s - 1) * factorial(r)
        return out

    def sort_key(self):
        return (self.weight, self.depth, self.s, self.r)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        if self.is_bracket and self.depth:
            return "[" + ",".join(map(str, self.s)) + "]"
        return "[" + ",".join(map(str, self.s)) + "|" + ",".join(map(str, self.r)) + "]"


class IndexFamily(enum.Enum):
    ALL = "all"
    POSITIVE = "positive"
    BRACKETS = "brackets"
    BRACKETS123 = "brackets123"
    BRACKETS_GE2 = "brackets-ge2"

    def contains(self, idx: BiBracketIndex) -> bool:
        if self is IndexFamily.ALL:
            return True
        if self is IndexFamily.POSITIVE:
            return all(s > r for s, r in zip(idx.s, idx.r))
        if not idx.is_bracket:
            return False
        if self is IndexFamily.BRACKETS123:
            return all(s <= 3 for s in idx.s)
        if self is IndexFamily.BRACKETS_GE2:
            return all(s >= 2 for s in idx.s)
        return True


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_indices(max_weight: int, max_depth: int, family=IndexFamily.ALL) -> list:
    """All indices of ``family`` with weight <= max_weight and depth <= max_depth.

    The empty index is included; order is ascending weight, then depth,
    then lexicographic on (s, r).
    """
    if max_weight < 0 or max_depth < 0:
        raise DomainError("bounds must be non-negative")
    family = IndexFamily(family)
    out = []
    for w in range(max_weight + 1):
        for depth in range(min(w, max_depth) + 1):
            # each slot j carries a part w_j = s_j + r_j >= 1
            for parts in _compositions(w, depth):
                for s in product(*(range(1, p + 1) for p in parts)):
                    r = tuple(p - x for p, x in zip(parts, s))
                    idx = BiBracketIndex(s, r)
                    if family.contains(idx):
                        out.append(idx)
    out.sort(key=BiBracketIndex.sort_key)
    return out


def _suffix_closure(indices: Iterable[BiBracketIndex]) -> list:
    seen = set()
    for idx in indices:
        while idx not in seen:
            seen.add(idx)
            if idx.depth == 0:
                break
            idx = idx.tail
    return sorted(seen, key=BiBracketIndex.sort_key)


def _check_invertible(idx: BiBracketIndex, ring: RingSpec):
    if ring.is_prime and idx.scale_factor() % ring.prime == 0:
        raise FactorialNotInvertible(f"factorials of {idx} vanish mod {ring.prime}")


def bibracket_batch(indices: Iterable, N: int, ring: RingSpec, workers: int = 1) -> dict:
    """Expansions through q^N of every index in ``indices`` (shared sweep).

    Returns a dict mapping each requested index to its TruncatedQSeries.
    The result does not depend on ``workers``.
    """
    indices = list(indices)
    if N < 0:
        raise DomainError("N must be non-negative")
    for idx in indices:
        _check_invertible(idx, ring)
    closure = _suffix_closure(indices)
    row = {idx: i for i, idx in enumerate(closure)}
    prime = ring.prime if ring.is_prime else None

    A = np.zeros((len(closure), N + 1), dtype=np.int64 if prime else object)
    if prime is None:
        A[:] = 0
    A[row[BiBracketIndex()], 0] = 1

    # group the non-empty indices by head s, then by r
    by_s: dict[int, dict] = {}
    for idx in closure:
        if idx.depth == 0:
            continue
        s, r = idx.head
        tails = by_s.setdefault(s, {})
        tails.setdefault(idx.tail, []).append((r, row[idx]))
    plans = []
    for s in sorted(by_s):
        # a tail of depth d vanishes until u > d; sorting by depth makes the
        # live tails at step u a prefix
        tails = sorted(by_s[s], key=lambda t: (t.depth, t.sort_key()))
        tail_rows = np.array([row[t] for t in tails], dtype=np.intp)
        min_start = np.array([t.depth + 1 for t in tails])
        updates: dict[int, tuple[list, list]] = {}
        for pos, t in enumerate(tails):
            for r, target in by_s[s][t]:
                src, dst = updates.setdefault(r, ([], []))
                src.append(pos)
                dst.append(target)
        updates = {
            r: (np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp))
            for r, (src, dst) in sorted(updates.items())
        }
        plans.append((s, tail_rows, min_start, updates))

    def reduce(x):
        return x % prime if prime else x

    def vpow(v, e):
        return pow(v, e, prime) if prime else v**e

    def inner(plan, u):
        # (sum_v v^(s-1) q^(uv)) * A_T(u-1) for every tail T of this head s
        s, tail_rows, min_start, _ = plan
        n_live = int(np.searchsorted(min_start, u, side="right"))
        if n_live == 0:
            return None
        G = A[tail_rows[:n_live]]
        H = np.zeros_like(G)
        for v in range(1, N // u + 1):
            shift = u * v
            c = vpow(v, s - 1)
            H[:, shift:] = reduce(H[:, shift:] + c * G[:, : N + 1 - shift])
        return H

    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for u in range(1, N + 1):
            if pool is not None:
                Hs = list(pool.map(lambda plan: inner(plan, u), plans))
            else:
                Hs = [inner(plan, u) for plan in plans]
            for (s, tail_rows, min_start, updates), H in zip(plans, Hs):
                if H is None:
                    continue
                n_live = len(H)
                for r, (src, dst) in updates.items():
                    keep = src < n_live
                    if not keep.any():
                        continue
                    src_k, dst_k = src[keep], dst[keep]
                    A[dst_k] = reduce(A[dst_k] + vpow(u, r) * H[src_k])
    finally:
        if pool is not None:
            pool.shutdown()

    out = {}
    for idx in indices:
        vec = A[row[idx]]
        scale = idx.scale_factor()
        if prime:
            arr = vec * pow(scale, -1, prime) % prime
        else:
            arr = np.array([Fraction(int(c), scale) for c in vec] + [None], dtype=object)[:-1]
        out[idx] = TruncatedQSeries._wrap(ring, arr)
    return out


@lru_cache(maxsize=4096)
def _single(idx: BiBracketIndex, N: int, ring: RingSpec) -> TruncatedQSeries:
    return bibracket_batch([idx], N, ring)[idx]


def bibracket_series(idx: BiBracketIndex, N: int, ring: RingSpec) -> TruncatedQSeries:
    """Expansion of one bi-bracket through q^N."""
    _check_invertible(idx, ring)
    return _single(idx, N, ring)


# ---------------------------------------------------------------------------
# general zeta_q series


@dataclass(frozen=True)
class QAnalogueSpec:
    """sum_{n_1 > ... > n_l > 0} prod_j Q_j(q^n_j) / (1 - q^n_j)^s_j.

    ``filtration`` optionally records the (weight, depth) filtration level
    the series is known to lie in.
    """

    s: tuple
    Q: tuple
    filtration: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        s = tuple(int(x) for x in self.s)
        Q = tuple(q if isinstance(q, RationalPolynomial) else RationalPolynomial(q) for q in self.Q)
        if len(s) != len(Q):
            raise SpecViolation("s and Q differ in length")
        if any(x < 0 for x in s):
            raise SpecViolation(f"exponents must be >= 0, got {s}")
        if Q and Q[0][0] != 0:
            raise SpecViolation("Q_1 must have zero constant term")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "Q", Q)

    @property
    def length(self) -> int:
        return len(self.s)

    def in_space(self, d: int = 0, circle: bool = False) -> bool:
        """Membership of the defining data in Z_q[d] (or its circle subspace)."""
        if any(q.degree > s - d for q, s in zip(self.Q, self.s)):
            return False
        if circle and any(q[0] != 0 for q in self.Q):
            return False
        return True


def zeta_q_series(spec: QAnalogueSpec, N: int, ring: RingSpec) -> TruncatedQSeries:
    """Expansion through q^N of the zeta_q series described by ``spec``."""
    l = spec.length
    if l == 0:
        return TruncatedQSeries.one(ring, N)
    if spec.Q[0][0] != 0:
        raise SpecViolation("Q_1 must have zero constant term")
    # layer coefficients of Q_j(t)/(1-t)^s_j as power series in t
    layers = [[ring.element(c) for c in q.over_one_minus_t(s, N)] for s, q in zip(spec.s, spec.Q)]
    # A[j] holds the partial sum of positions j..l-1 over bound n
    A = [ring.zeros(N + 1) for _ in range(l + 1)]
    A[l][0] = ring.element(1)
    for n in range(1, N + 1):
        snap = [a.copy() for a in A]
        for j in range(l):
            c = layers[j]
            tail = snap[j + 1]
            acc = A[j]
            for m in range(0, N // n + 1):
                if c[m] == 0:
                    continue
                shift = n * m
                acc[shift:] = ring.reduce(acc[shift:] + c[m] * tail[: N + 1 - shift])
    return TruncatedQSeries._wrap(ring, A[0])


MODELS = ("BZ", "SZ", "OOZ", "Okounkov")


def model_spec(model: str, s: Sequence[int]) -> QAnalogueSpec:
    """The (s, Q) data of one of the standard q-analogue models."""
    s = tuple(int(x) for x in s)
    t = RationalPolynomial.monomial
    if model == "BZ":
        if not s or s[0] < 2 or any(x < 1 for x in s):
            raise DomainError("BZ needs s_1 >= 2 and s_i >= 1")
        return QAnalogueSpec(s, tuple(t(x - 1) for x in s))
    if model == "SZ":
        if not s or s[0] < 1 or any(x < 0 for x in s):
            raise DomainError("SZ needs s_1 >= 1 and s_i >= 0")
        z = s.count(0)
        return QAnalogueSpec(s, tuple(t(x) for x in s), filtration=(sum(s) + z, len(s) + z))
    if model == "OOZ":
        if not s or any(x < 1 for x in s):
            raise DomainError("OOZ needs s_i >= 1")
        return QAnalogueSpec(s, (t(1),) + (t(0),) * (len(s) - 1))
    if model == "Okounkov":
        if not s or any(x < 2 for x in s):
            raise DomainError("Okounkov needs s_i >= 2")
        Q = tuple(
            t(x // 2) if x % 2 == 0 else t((x - 1) // 2) * RationalPolynomial((1, 1)) for x in s
        )
        return QAnalogueSpec(s, Q)
    raise DomainError(f"unknown model {model!r}; choose from {MODELS}")


def derive_index(idx: BiBracketIndex) -> dict:
    """q d/dq of a bi-bracket as {index: rational coefficient}."""
    out: dict[BiBracketIndex, Fraction] = {}
    for j, (s, r) in enumerate(zip(idx.s, idx.r)):
        new_s = idx.s[:j] + (s + 1,) + idx.s[j + 1 :]
        new_r = idx.r[:j] + (r + 1,) + idx.r[j + 1 :]
        key = BiBracketIndex(new_s, new_r)
        out[key] = out.get(key, Fraction(0)) + s * (r + 1)
    return {k: v for k, v in out.items() if v}


EISENSTEIN_CONSTANTS = {2: Fraction(-1, 24), 4: Fraction(1, 1440), 6: Fraction(-1, 60480)}


def eisenstein(k: int, N: int) -> TruncatedQSeries:
    """G_k = constant + [k] over Q, for k in {2, 4, 6}."""
    if k not in EISENSTEIN_CONSTANTS:
        raise DomainError(f"Eisenstein series available for k in (2, 4, 6), got {k}")
    ring = RingSpec.rational()
    return sigma_series(k, N, ring) + TruncatedQSeries.from_values(ring, [EISENSTEIN_CONSTANTS[k]], N)


def _solve_exact(M: list, b: list) -> list:
    """Solve the square system M x = b over Q (M invertible)."""
    n = len(M)
    aug = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(M, b)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def depth1_basis(s: int) -> list:
    """The polynomials t P_{j-1}(t) (1-t)^(s-j), j = 1..s."""
    return [eulerian_numerator(j) * ONE_MINUS_T ** (s - j) for j in range(1, s + 1)]


def convert_zeta_to_depth1_basis(Q: RationalPolynomial, s: int) -> list:
    """Coefficients alpha_1..alpha_s with Q/(1-t)^s = sum alpha_j t P_{j-1}/(1-t)^j."""
    if s < 1:
        raise BasisViolation("s must be >= 1")
    if Q.degree > s or Q[0] != 0:
        raise BasisViolation(f"need Q in tQ[t] with deg Q <= {s}, got {Q}")
    basis = depth1_basis(s)
    # coefficients of t^1..t^s
    M = [[basis[j][i] for j in range(s)] for i in range(1, s + 1)]
    alpha = _solve_exact(M, [Q[i] for i in range(1, s + 1)])
    recon = RationalPolynomial()
    for a, p in zip(alpha, basis):
        recon = recon + p * a
    assert recon == Q
    return alpha
