"""Table reports: computed tables next to their conjectured values."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .genfun import (
    NamedSeries,
    expand,
    expected_lie_b,
    extract_generators_free,
    extract_lie_b,
    tm_numerator,
)
from .linalg import FIL_LOWER_BOUND, GR_NUM, PS_DIM, DimTable, fil_table, gr_table
from .psspace import REFERENCE_PS_DIMENSIONS, ps_dimension

MATCH = "match"
LOWER = "lower-than-expected"
EXCEEDS = "exceeds-expected"
TABLE_KINDS = ("fil", "gr", "generators", "lie")


def status(computed, expected) -> str:
    if computed == expected:
        return MATCH
    return LOWER if computed < expected else EXCEEDS


def expected_gr(K: int, L: int) -> DimTable:
    """Graded dimensions predicted by the refined conjecture."""
    series = expand(NamedSeries.CONJ13II, K, L)
    return DimTable({(k, l): int(series[k, l]) for k in range(K + 1) for l in range(L + 1)}, GR_NUM)


def expected_fil(K: int, L: int) -> DimTable:
    gr = expected_gr(K, L)
    entries = {}
    for k in range(K + 1):
        for l in range(L + 1):
            entries[(k, l)] = sum(gr[(a, b)] for a in range(k + 1) for b in range(l + 1))
    return DimTable(entries, FIL_LOWER_BOUND)


@dataclass
class TableReport:
    kind: str
    config: dict
    table: DimTable
    expected: DimTable | None = None
    stability: dict | None = None
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def comparison(self) -> dict:
        """{(k, l): (computed, expected, status)} over the cells with an expectation."""
        if self.expected is None:
            return {}
        out = {}
        for key, value in sorted(self.table.entries.items()):
            if key in self.expected:
                e = self.expected[key]
                out[key] = (value, e, status(value, e))
        return out

    @property
    def all_match(self) -> bool:
        return all(s == MATCH for _, _, s in self.comparison().values())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "table": self.table.to_dict(),
            "expected": self.expected.to_dict() if self.expected is not None else None,
            "comparison": {
                f"{k},{l}": {"computed": int(c), "expected": int(e), "status": s}
                for (k, l), (c, e, s) in self.comparison().items()
            },
            "stability": self.stability,
            "seconds": self.seconds,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TableReport":
        return cls(
            data["kind"],
            data["config"],
            DimTable.from_dict(data["table"]),
            DimTable.from_dict(data["expected"]) if data.get("expected") is not None else None,
            data.get("stability"),
            data.get("seconds", 0.0),
            data.get("extra", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TableReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "l", "computed", "expected", "status"])
        cmp = self.comparison()
        for (k, l), v in sorted(self.table.entries.items()):
            _, e, s = cmp.get((k, l), (v, "", ""))
            writer.writerow([k, l, v, e, s])
        return buf.getvalue()

    def to_markdown(self) -> str:
        """Grid in the usual layout: rows k and columns l, except rows l for PS tables."""
        cmp = self.comparison()
        ks = sorted({k for k, _ in self.table.entries})
        ls = sorted({l for _, l in self.table.entries})
        by_depth = self.kind == "psdim"
        rows, cols = (ls, ks) if by_depth else (ks, ls)
        head = "l \\ k" if by_depth else "k \\ l"

        def cell(r, c):
            key = (c, r) if by_depth else (r, c)
            if key not in self.table.entries:
                return "-"
            v = self.table.entries[key]
            if key in cmp and cmp[key][2] != MATCH:
                return f"{v} (expected {cmp[key][1]})"
            return str(v)

        lines = ["| " + " | ".join([head] + [str(c) for c in cols]) + " |"]
        lines.append("|" + "---|" * (len(cols) + 1))
        for r in rows:
            lines.append("| " + " | ".join([str(r)] + [cell(r, c) for c in cols]) + " |")
        return "\n".join(lines) + "\n"


def table_report(kind: str, max_weight: int, max_depth: int, family="all", N="auto", primes=None,
                 workers: int = 1, stability_offset: int = 0, cache=None) -> TableReport:
    """Compute one of the fil / gr / generators / lie tables with its expectation."""
    if kind not in TABLE_KINDS:
        raise ValueError(f"unknown table {kind!r}; choose from {TABLE_KINDS}")
    kwargs = {"family": family, "N": N, "workers": workers, "stability_offset": stability_offset, "cache": cache}
    if primes:
        kwargs["primes"] = tuple(primes)
    fil = fil_table(max_weight, max_depth, **kwargs)
    K, L = max_weight, max_depth
    if kind == "fil":
        table, expected = fil, expected_fil(K, L)
    elif kind == "gr":
        table, expected = gr_table(fil), expected_gr(K, L)
    elif kind == "generators":
        numerator = tm_numerator(K, L)
        table = extract_generators_free(gr_table(fil), numerator, K, L)
        expected = extract_generators_free(expand(NamedSeries.CONJ13II, K, L), numerator, K, L)
    else:
        numerator = tm_numerator(K, L)
        table = extract_lie_b(gr_table(fil), numerator, K, L)
        expected = expected_lie_b(K, L)
    config = {
        "family": fil.meta["family"],
        "max_weight": K,
        "max_depth": L,
        "N": fil.meta["N"],
        "N_rule": fil.meta["N_rule"],
        "primes": fil.meta["primes"],
        "threads": workers,
    }
    return TableReport(kind, config, table, expected, fil.meta.get("stability"), fil.meta["seconds"])


def psdim_report(ks, ls, mode: str = "exact") -> TableReport:
    """dim PS(k-l, l) for every k in ``ks``, l in ``ls`` with k >= l."""
    entries = {}
    for l in ls:
        for k in ks:
            if k >= l:
                entries[(k, l)] = ps_dimension(k, l, mode)
    known = {key: REFERENCE_PS_DIMENSIONS[key] for key in entries if key in REFERENCE_PS_DIMENSIONS}
    config = {"k": list(ks), "l": list(ls), "mode": mode}
    return TableReport("psdim", config, DimTable(entries, PS_DIM), DimTable(known, PS_DIM))
