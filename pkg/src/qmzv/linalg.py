"""Rank and span membership of truncated q-series over prime fields.

Ranks computed here are lower bounds for the dimension of the span of the
underlying q-series: a relation that holds modulo q^(N+1) and modulo p
need not hold exactly, but an independence found at (N, p) is genuine.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .bibracket import BiBracketIndex, IndexFamily, bibracket_batch, enumerate_indices
from .errors import DomainError, MissingEntry, RingMismatch, TruncationMismatch
from .qseries import DEFAULT_PRIME, SECOND_PRIME, RingSpec, TruncatedQSeries

FIL_LOWER_BOUND = "FilLowerBound"
GR_NUM = "GrNum"
G_NUM = "GNum"
B_NUM = "BNum"
PS_DIM = "PSDim"


class TruncationTooSmall(UserWarning):
    pass


@dataclass(frozen=True)
class CoefficientMatrix:
    """Coefficient vectors over F_p, one row per tagged series."""

    ring: RingSpec
    rows: np.ndarray
    tags: tuple

    def __post_init__(self):
        if not self.ring.is_prime:
            raise DomainError("CoefficientMatrix needs a prime field")
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2:
            rows = rows.reshape(len(self.tags), -1)
        if len(self.tags) != rows.shape[0]:
            raise DomainError("one tag per row required")
        if len(set(self.tags)) != len(self.tags):
            raise DomainError("row tags must be unique")
        rows = rows % self.ring.prime
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "tags", tuple(self.tags))

    @classmethod
    def from_series(cls, series: dict | Sequence, tags: Sequence | None = None):
        """Build from {tag: series} or from a list of series (tags default to positions)."""
        if isinstance(series, dict):
            tags, series = list(series), list(series.values())
        else:
            series = list(series)
            tags = list(range(len(series))) if tags is None else list(tags)
        if not series:
            raise DomainError("empty family")
        ring, N = series[0].ring, series[0].N
        for s in series:
            if s.ring != ring:
                raise RingMismatch(f"{s.ring} vs {ring}")
            if s.N != N:
                raise TruncationMismatch(f"N={s.N} vs N={N}")
        return cls(ring, np.stack([s.coeffs for s in series]), tuple(tags))

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_cols(self) -> int:
        return self.rows.shape[1]

    @property
    def N(self) -> int:
        return self.n_cols - 1


@dataclass(frozen=True)
class RankProfile:
    rank: int
    pivot_rows: tuple
    N: int
    prime: int


def _matmul_mod(C: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    # C, B hold residues < p < 2^31; split C into 16-bit limbs so that every
    # partial sum of products stays below 2^63 for up to 2^16 terms
    if C.shape[1] == 0:
        return np.zeros((C.shape[0], B.shape[1]), dtype=np.int64)
    lo = C & 0xFFFF
    hi = C >> 16
    out = (hi @ B) % p
    out = (out * 65536 + (lo @ B)) % p
    return out


class Echelon:
    """Incremental reduced row-echelon basis over F_p.

    With ``track=True`` every basis row also carries its expression in the
    rows that were added, so membership queries can return coordinates.
    """

    def __init__(self, ncols: int, p: int, track: bool = False):
        self.p = p
        self.ncols = ncols
        self.basis = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []
        self.track = track
        self.n_added = 0
        self.transform = np.zeros((0, 0), dtype=np.int64)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, R: np.ndarray) -> np.ndarray:
        if not self.pivots:
            return R % self.p
        C = R[:, self.pivots]
        return (R - _matmul_mod(C, self.basis, self.p)) % self.p

    def reduce(self, vec) -> tuple[np.ndarray, np.ndarray]:
        """Residual of ``vec`` and the coefficients on the current basis rows."""
        vec = np.asarray(vec, dtype=np.int64).reshape(1, -1) % self.p
        coeffs = vec[:, self.pivots].copy()
        return self._reduce(vec)[0], coeffs[0]

    def add_rows(self, R: np.ndarray) -> list[bool]:
        """Add rows in order; returns which of them were independent."""
        p = self.p
        R = np.array(R, dtype=np.int64).reshape(-1, self.ncols) % p
        n = R.shape[0]
        T = None
        if self.track:
            # T[i] expresses candidate i in coordinates of all rows added so far
            base = self.n_added
            grown = np.zeros((len(self.pivots), base + n), dtype=np.int64)
            grown[:, :base] = self.transform
            self.transform = grown
            T = np.zeros((n, base + n), dtype=np.int64)
            T[np.arange(n), base + np.arange(n)] = 1
            if self.pivots:
                T = (T - _matmul_mod(R[:, self.pivots], self.transform, p)) % p
        R = self._reduce(R)
        independent = []
        for i in range(n):
            nz = np.flatnonzero(R[i])
            if len(nz) == 0:
                independent.append(False)
                continue
            independent.append(True)
            piv = int(nz[0])
            inv = pow(int(R[i, piv]), -1, p)
            row = R[i] * inv % p
            R[i] = row
            if T is not None:
                T[i] = T[i] * inv % p
            # clear the new pivot column in later candidates and in the basis
            f = R[i + 1 :, piv].copy()
            if f.any():
                R[i + 1 :] = (R[i + 1 :] - np.outer(f, row) % p) % p
                if T is not None:
                    T[i + 1 :] = (T[i + 1 :] - np.outer(f, T[i]) % p) % p
            g = self.basis[:, piv].copy()
            if g.any():
                self.basis = (self.basis - np.outer(g, row) % p) % p
                if T is not None:
                    self.transform = (self.transform - np.outer(g, T[i]) % p) % p
            self.basis = np.vstack([self.basis, row[None, :]])
            self.pivots.append(piv)
            if T is not None:
                self.transform = np.vstack([self.transform, T[i][None, :]])
        self.n_added += n
        return independent


def rank(matrix: CoefficientMatrix) -> RankProfile:
    """Rank over F_p and the greedy independent rows in the given order."""
    ech = Echelon(matrix.n_cols, matrix.ring.prime)
    independent = ech.add_rows(matrix.rows)
    pivots = tuple(t for t, ok in zip(matrix.tags, independent) if ok)
    return RankProfile(ech.rank, pivots, matrix.N, matrix.ring.prime)


def membership(target, basis: CoefficientMatrix) -> np.ndarray | None:
    """Coordinates c with target = sum_i c_i * basis_row_i over F_p, or None.

    A result is evidence of membership at this truncation and prime, not a
    proof of an identity between the full q-series.
    """
    p = basis.ring.prime
    if isinstance(target, TruncatedQSeries):
        if target.ring != basis.ring:
            raise RingMismatch(f"{target.ring} vs {basis.ring}")
        target = target.coeffs
    target = np.asarray(target, dtype=np.int64) % p
    if target.shape != (basis.n_cols,):
        raise TruncationMismatch(f"target has {target.shape[0]} coefficients, basis {basis.n_cols}")
    ech = Echelon(basis.n_cols, p, track=True)
    ech.add_rows(basis.rows)
    residual, coeffs = ech.reduce(target)
    if residual.any():
        return None
    if ech.rank == 0:
        return np.zeros(basis.n_rows, dtype=np.int64)
    return _matmul_mod(coeffs[None, :], ech.transform, p)[0]


def rational_rank(rows: Sequence[Sequence]) -> int:
    """Exact rank over Q; meant for small cross-checks."""
    M = [[Fraction(x) for x in row] for row in rows]
    rank_ = 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        piv = next((i for i in range(rank_, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[rank_], M[piv] = M[piv], M[rank_]
        pr = M[rank_]
        for i in range(rank_ + 1, len(M)):
            if M[i][col] != 0:
                f = M[i][col] / pr[col]
                M[i] = [a - f * b for a, b in zip(M[i], pr)]
        rank_ += 1
    return rank_


# ---------------------------------------------------------------------------
# dimension tables


@dataclass
class DimTable:
    """Integer (or rational) table indexed by (k, l)."""

    entries: dict
    meaning: str
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key):
        try:
            return self.entries[key]
        except KeyError:
            raise MissingEntry(f"no entry at {key} in {self.meaning} table") from None

    def get(self, key, default=None):
        return self.entries.get(key, default)

    def __contains__(self, key):
        return key in self.entries

    @property
    def max_k(self) -> int:
        return max(k for k, _ in self.entries)

    @property
    def max_l(self) -> int:
        return max(l for _, l in self.entries)

    def row(self, k: int, ls: Iterable[int] | None = None) -> list:
        ls = range(1, self.max_l + 1) if ls is None else ls
        return [self[(k, l)] for l in ls]

    def to_dict(self) -> dict:
        return {
            "meaning": self.meaning,
            "entries": {f"{k},{l}": _jsonable(v) for (k, l), v in sorted(self.entries.items())},
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DimTable":
        entries = {}
        for key, v in data["entries"].items():
            k, l = (int(x) for x in key.split(","))
            entries[(k, l)] = _from_jsonable(v)
        return cls(entries, data["meaning"], dict(data.get("meta", {})))

    def __eq__(self, other):
        if not isinstance(other, DimTable):
            return NotImplemented
        return self.entries == other.entries and self.meaning == other.meaning


def _jsonable(v):
    if isinstance(v, Fraction) and v.denominator != 1:
        return str(v)
    return int(v)


def _from_jsonable(v):
    return Fraction(v) if isinstance(v, str) else int(v)


MIN_TRUNCATION = 200


def auto_truncation(n_rows: int) -> int:
    """Row-count truncation rule: twice the row count, at least 200."""
    return max(2 * n_rows, MIN_TRUNCATION)


def _fil_pass(rows: np.ndarray, weights: np.ndarray, depths: np.ndarray, l: int, K: int, p: int):
    """Ranks of the depth <= l families for every weight bound 0..K."""
    ech = Echelon(rows.shape[1], p)
    out = []
    for k in range(K + 1):
        sel = np.flatnonzero((weights == k) & (depths <= l))
        if len(sel):
            ech.add_rows(rows[sel])
        out.append(ech.rank)
    return out


def _fil_ranks(indices, N, p, K, L, workers, cache=None):
    ring = RingSpec.prime_field(p)
    source = cache.batch if cache is not None else bibracket_batch
    series = source(indices, N, ring, workers=workers)
    rows = np.stack([series[i].coeffs for i in indices])
    weights = np.array([i.weight for i in indices])
    depths = np.array([i.depth for i in indices])
    ls = list(range(0, L + 1))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            passes = list(pool.map(lambda l: _fil_pass(rows, weights, depths, l, K, p), ls))
    else:
        passes = [_fil_pass(rows, weights, depths, l, K, p) for l in ls]
    return {(k, l): passes[l][k] for l in ls for k in range(K + 1)}


def fil_table(
    max_weight: int,
    max_depth: int,
    family=IndexFamily.ALL,
    N: int | str = "auto",
    primes: Sequence[int] = (DEFAULT_PRIME, SECOND_PRIME),
    workers: int = 1,
    stability_offset: int = 0,
    cache=None,
) -> DimTable:
    """Lower bounds fil^num_{k,l} for 0 <= k <= max_weight, 0 <= l <= max_depth.

    Entry (k, l) is the F_p-rank of the expansions of all indices of the
    family with weight <= k and depth <= l.  With several primes the ranks
    must agree; a disagreement raises.  ``N="auto"`` starts at 200 and
    raises N to twice the largest rank found until N covers it; ``N="rows"`` uses
    twice the enumerated row count.  ``stability_offset`` > 0 also
    recomputes at N + offset and records both rank tables in ``meta``.
    ``cache`` is an optional ``SeriesCache`` serving the expansions.
    """
    family = IndexFamily(family)
    primes = tuple(primes)
    if len(set(primes)) != len(primes) or not primes:
        raise DomainError("primes must be distinct and non-empty")
    indices = enumerate_indices(max_weight, max_depth, family)
    n_rows = len(indices)
    start = time.perf_counter()
    if N == "auto":
        # grow N until it is at least twice the largest rank found
        chosen = MIN_TRUNCATION
        first = _fil_ranks(indices, chosen, primes[0], max_weight, max_depth, workers, cache)
        while chosen < 2 * max(first.values()):
            chosen = 2 * max(first.values())
            first = _fil_ranks(indices, chosen, primes[0], max_weight, max_depth, workers, cache)
    else:
        chosen = auto_truncation(n_rows) if N == "rows" else int(N)
        first = _fil_ranks(indices, chosen, primes[0], max_weight, max_depth, workers, cache)
    meta: dict = {
        "family": family.value,
        "max_weight": max_weight,
        "max_depth": max_depth,
        "N": chosen,
        "N_rule": N if N in ("auto", "rows") else "fixed",
        "rows": n_rows,
        "primes": list(primes),
    }
    if N != "auto" and chosen < n_rows:
        msg = f"N={chosen} is smaller than the {n_rows} enumerated rows"
        warnings.warn(msg, TruncationTooSmall, stacklevel=2)
        meta["warning"] = "TruncationTooSmall: " + msg
    per_prime = [first] + [_fil_ranks(indices, chosen, p, max_weight, max_depth, workers, cache) for p in primes[1:]]
    for p, ranks in zip(primes[1:], per_prime[1:]):
        if ranks != per_prime[0]:
            bad = [key for key in ranks if ranks[key] != per_prime[0][key]]
            raise ArithmeticError(f"ranks differ between primes {primes[0]} and {p} at {bad[:5]}")
    entries = dict(per_prime[0])
    if stability_offset:
        later = _fil_ranks(indices, chosen + stability_offset, primes[0], max_weight, max_depth, workers, cache)
        meta["stability"] = {
            "N": chosen,
            "N_prime": chosen + stability_offset,
            "stable": later == entries,
            "ranks_at_N_prime": {f"{k},{l}": v for (k, l), v in sorted(later.items())},
        }
    meta["seconds"] = round(time.perf_counter() - start, 3)
    return DimTable(entries, FIL_LOWER_BOUND, meta)


def gr_table(fil: DimTable) -> DimTable:
    """gr_{k,l} = fil_{k,l} - fil_{k,l-1} - fil_{k-1,l} + fil_{k-1,l-1}.

    The row k = 0 and the column l = 0 of ``fil`` read as 1 (span of the
    constants) when absent; gr_{0,0} = 1 and gr vanishes elsewhere on
    those boundaries.
    """

    def f(k, l):
        if k == 0 or l == 0:
            return fil.get((k, l), 1)
        return fil[(k, l)]

    K = max(k for k, _ in fil.entries)
    L = max(l for _, l in fil.entries)
    entries = {}
    for k in range(K + 1):
        for l in range(L + 1):
            if k == 0 and l == 0:
                entries[(0, 0)] = 1
            elif k == 0 or l == 0:
                entries[(k, l)] = 0
            else:
                entries[(k, l)] = f(k, l) - f(k, l - 1) - f(k - 1, l) + f(k - 1, l - 1)
    return DimTable(entries, GR_NUM, {"source": fil.meta})


def series_matrix(indices: Sequence[BiBracketIndex], N: int, p: int, workers: int = 1) -> CoefficientMatrix:
    """Coefficient matrix of the given bi-brackets over F_p."""
    ring = RingSpec.prime_field(p)
    series = bibracket_batch(indices, N, ring, workers=workers)
    return CoefficientMatrix.from_series({i: series[i] for i in indices})
