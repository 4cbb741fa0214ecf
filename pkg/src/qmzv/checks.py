"""Named numeric checks: span memberships, series identities and bounds.

Every check returns a ``CheckReport``; a failed check carries the first
counterexample found.
"""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .bibracket import (
    BiBracketIndex,
    IndexFamily,
    QAnalogueSpec,
    bibracket_batch,
    derive_index,
    eisenstein,
    enumerate_indices,
    zeta_q_series,
)
from .errors import UnknownCheck
from .genfun import (
    CheckReport,
    check_identity_msq,
    check_okounkov_factorization,
    check_y1_bk,
    check_y1_conj13,
    upper_bound_series,
)
from .linalg import PS_DIM, DimTable, Echelon, fil_table, rational_rank
from .psspace import ps_dimension
from .qseries import DEFAULT_PRIME, SECOND_PRIME, RationalPolynomial, RingSpec, TruncatedQSeries, q_derivative

PRIMES = (DEFAULT_PRIME, SECOND_PRIME)

# (targets, spanning family) for the span conjectures
MEMBERSHIP_CASES = {
    "b1": (IndexFamily.ALL, IndexFamily.POSITIVE),
    "b2": (IndexFamily.ALL, IndexFamily.BRACKETS),
    "b3": (IndexFamily.BRACKETS, IndexFamily.BRACKETS123),
}


def check_membership(name: str, max_weight: int = 6, N: int = 400, primes: Sequence[int] = PRIMES) -> CheckReport:
    """Each target index of weight <= max_weight lies in the span of the
    spanning family of weight <= max_weight, at truncation N, for every prime."""
    targets_family, span_family = MEMBERSHIP_CASES[name]
    targets = enumerate_indices(max_weight, max_weight, targets_family)
    basis = enumerate_indices(max_weight, max_weight, span_family)
    wanted = list(dict.fromkeys(targets + basis))
    ranks = {}
    for p in primes:
        series = bibracket_batch(wanted, N, RingSpec.prime_field(p))
        ech = Echelon(N + 1, p)
        ech.add_rows(np.stack([series[i].coeffs for i in basis]))
        ranks[p] = ech.rank
        for idx in targets:
            residual, _ = ech.reduce(series[idx].coeffs)
            if residual.any():
                return CheckReport(
                    name,
                    False,
                    f"{idx} is outside the {span_family.value} span mod {p} at N={N}",
                    {"index": str(idx), "prime": p, "N": N},
                )
    return CheckReport(
        name,
        True,
        f"{len(targets)} indices ({targets_family.value}) of weight <= {max_weight} lie in the "
        f"{span_family.value} span at N={N} for primes {list(primes)}",
        data={"targets": len(targets), "basis": len(basis), "span_rank": ranks[primes[0]], "N": N},
    )


def _first_difference(name: str, a: TruncatedQSeries, b: TruncatedQSeries, what: str) -> CheckReport | None:
    for n, (x, y) in enumerate(zip(a.tolist(), b.tolist())):
        if x != y:
            return CheckReport(name, False, f"{what} differs at q^{n}", {"what": what, "n": n, "lhs": str(x), "rhs": str(y)})
    return None


def check_fildefect_example(N: int = 300) -> CheckReport:
    """[1,1|0,1] = zeta_q(1,1; t,t) + zeta_q(1,1,1; t,t,1-t) over Q."""
    ring = RingSpec.rational()
    t = RationalPolynomial.monomial(1)
    lhs = bibracket_batch([BiBracketIndex((1, 1), (0, 1))], N, ring)[BiBracketIndex((1, 1), (0, 1))]
    rhs = zeta_q_series(QAnalogueSpec((1, 1), (t, t)), N, ring) + zeta_q_series(
        QAnalogueSpec((1, 1, 1), (t, t, RationalPolynomial((1, -1)))), N, ring
    )
    bad = _first_difference("fildefect-example", lhs, rhs, "[1,1|0,1]")
    return bad or CheckReport("fildefect-example", True, f"identity holds through q^{N}")


def check_partition_swap(max_sum: int = 10, N: int = 300) -> CheckReport:
    """[s|r] = [r+1|s-1] in depth 1 for s + r <= max_sum."""
    ring = RingSpec.rational()
    pairs = [(s, r) for s in range(1, max_sum + 1) for r in range(0, max_sum + 1 - s)]
    indices = {BiBracketIndex((s,), (r,)) for s, r in pairs} | {BiBracketIndex((r + 1,), (s - 1,)) for s, r in pairs}
    series = bibracket_batch(sorted(indices), N, ring)
    for s, r in pairs:
        a, b = BiBracketIndex((s,), (r,)), BiBracketIndex((r + 1,), (s - 1,))
        bad = _first_difference("partition-swap", series[a], series[b], f"{a} vs {b}")
        if bad:
            return bad
    return CheckReport("partition-swap", True, f"{len(pairs)} depth-1 swaps hold through q^{N}")


def check_derivation(max_weight: int = 6, N: int = 300) -> CheckReport:
    """q d/dq of each bi-bracket of weight <= max_weight equals its derived combination, over Q."""
    ring = RingSpec.rational()
    indices = [i for i in enumerate_indices(max_weight, max_weight) if i.depth]
    derived = {idx: derive_index(idx) for idx in indices}
    wanted = set(indices).union(*(d.keys() for d in derived.values()))
    series = bibracket_batch(sorted(wanted), N, ring)
    for idx in indices:
        rhs = TruncatedQSeries.zero(ring, N)
        for j, c in derived[idx].items():
            rhs = rhs + series[j].scale(c)
        bad = _first_difference("derivation", q_derivative(series[idx]), rhs, f"d{idx}")
        if bad:
            return bad
    return CheckReport("derivation", True, f"{len(indices)} indices of weight <= {max_weight} through q^{N}")


def check_stuffle_closure(max_weight: int = 4, N: int = 300, p: int = DEFAULT_PRIME) -> CheckReport:
    """Products of two indices of weight <= max_weight lie in the span of the
    indices bounded by the summed weight and depth."""
    ring = RingSpec.prime_field(p)
    factors = [i for i in enumerate_indices(max_weight, max_weight) if i.depth]
    spans: dict = {}
    top = enumerate_indices(2 * max_weight, 2 * max_weight)
    series = bibracket_batch(top, N, ring)
    n_checked = 0
    for a, b in combinations_with_replacement(factors, 2):
        key = (a.weight + b.weight, a.depth + b.depth)
        if key not in spans:
            basis = [i for i in top if i.weight <= key[0] and i.depth <= key[1]]
            ech = Echelon(N + 1, p)
            ech.add_rows(np.stack([series[i].coeffs for i in basis]))
            spans[key] = ech
        residual, _ = spans[key].reduce((series[a] * series[b]).coeffs)
        n_checked += 1
        if residual.any():
            return CheckReport(
                "stuffle-closure", False, f"{a}*{b} is outside the span at N={N}", {"a": str(a), "b": str(b), "prime": p}
            )
    return CheckReport("stuffle-closure", True, f"{n_checked} products in span mod {p} at N={N}")


def qmf_monomial_dimensions(max_weight: int = 12, N: int = 60) -> list:
    """Rank over Q of the G_2^a G_4^b G_6^c of weight exactly k, for k = 0..max_weight."""
    G = {k: eisenstein(k, N) for k in (2, 4, 6)}
    one = TruncatedQSeries.one(RingSpec.rational(), N)
    dims = []
    for k in range(max_weight + 1):
        rows = []
        for a in range(k // 2 + 1):
            for b in range((k - 2 * a) // 4 + 1):
                rest = k - 2 * a - 4 * b
                if rest % 6:
                    continue
                m = one
                for g, e in ((2, a), (4, b), (6, rest // 6)):
                    for _ in range(e):
                        m = m * G[g]
                rows.append(m.tolist())
        dims.append(rational_rank(rows) if rows else 0)
    return dims


def ps_table(max_k: int, ls: Sequence[int]) -> DimTable:
    """p_{k,l} for l in ``ls`` and l <= k <= max_k."""
    entries = {(k, l): ps_dimension(k, l) for l in ls for k in range(l, max_k + 1)}
    return DimTable(entries, PS_DIM)


def check_theorem34(
    K: int = 8, fil: DimTable | None = None, ps: DimTable | None = None, workers: int = 1
) -> CheckReport:
    """The partition-shuffle upper bound for dim Fil_k^W dominates the
    computed lower bound fil_{k,k}; reports where they stop coinciding."""
    ps = ps if ps is not None else ps_table(K, range(2, K + 1))
    fil = fil if fil is not None else fil_table(K, K, workers=workers)
    upper = [int(x) for x in upper_bound_series(ps, K)]
    lower = [1] + [fil[(k, k)] for k in range(1, K + 1)]
    data = {"upper": upper, "lower": lower}
    below = [k for k in range(K + 1) if upper[k] < lower[k]]
    if below:
        k = below[0]
        return CheckReport("theorem34", False, f"upper bound below lower bound at x^{k}", {"k": k, "upper": upper[k], "lower": lower[k]}, data)
    gaps = [k for k in range(K + 1) if upper[k] != lower[k]]
    if gaps:
        k = gaps[0]
        detail = f"bounds coincide through x^{k - 1}, diverge at x^{k} ({upper[k]} vs {lower[k]})"
    else:
        detail = f"bounds coincide through x^{K}"
    return CheckReport("theorem34", True, detail, data=data)


def run_check(name: str, **caps) -> CheckReport:
    """Dispatch a named check; ``caps`` are passed to it when accepted."""
    if name not in CHECKS:
        raise UnknownCheck(f"unknown check {name!r}; choose from {sorted(CHECKS)}")
    fn, accepted = CHECKS[name]
    return fn(**{k: v for k, v in caps.items() if k in accepted and v is not None})


CHECKS = {
    "msq": (lambda K=60: check_identity_msq(K), {"K"}),
    "y1-bk": (lambda K=30: check_y1_bk(K), {"K"}),
    "y1-conj13": (lambda K=30: check_y1_conj13(K), {"K"}),
    "okounkov-factorization": (lambda K=30: check_okounkov_factorization(K), {"K"}),
    "theorem34": (lambda K=8, workers=1: check_theorem34(K, workers=workers), {"K", "workers"}),
    "b1": (lambda **kw: check_membership("b1", **kw), {"max_weight", "N", "primes"}),
    "b2": (lambda **kw: check_membership("b2", **kw), {"max_weight", "N", "primes"}),
    "b3": (lambda **kw: check_membership("b3", **kw), {"max_weight", "N", "primes"}),
    "fildefect-example": (check_fildefect_example, {"N"}),
    "derivation": (check_derivation, {"max_weight", "N"}),
    "partition-swap": (check_partition_swap, {"N"}),
    "stuffle-closure": (check_stuffle_closure, {"max_weight", "N"}),
}
