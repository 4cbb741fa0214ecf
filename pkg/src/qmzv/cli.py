"""Command-line interface: ``qmzv expand | table | psdim | check``.

Exit status is 0 when everything matches, 1 when a table cell or a
check disagrees with its expectation, and 2 for usage or internal errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass

from .bibracket import MODELS, BiBracketIndex, IndexFamily, bibracket_series, model_spec, zeta_q_series
from .cache import CACHE_ENV, SeriesCache, default_cache_dir
from .checks import CHECKS, run_check
from .errors import ParseError, QMZVError
from .qseries import DEFAULT_PRIME, SECOND_PRIME, RingSpec
from .reports import TABLE_KINDS, psdim_report, table_report

FORMATS = ("text", "json", "csv", "markdown")
_MODEL_NAMES = {m.lower(): m for m in MODELS}


@dataclass
class RunConfig:
    primes: tuple = (DEFAULT_PRIME, SECOND_PRIME)
    N: int | str = "auto"
    max_weight: int = 4
    max_depth: int | None = None
    family: str = "all"
    threads: int = 1
    output: str = "text"
    cache_dir: str | None = None

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("primes must be distinct")


# ---------------------------------------------------------------------------
# parsing


def _int_list(source: str, start: int, end: int) -> tuple:
    body = source[start:end]
    if not body.strip():
        return ()
    out, pos = [], start
    for part in body.split(","):
        if not re.fullmatch(r"\s*\d+\s*", part):
            raise ParseError(f"expected a non-negative integer, found {part.strip()!r}", source, pos)
        out.append(int(part))
        pos += len(part) + 1
    return tuple(out)


def parse_target(text: str):
    """A bi-bracket index ``[s1,..|r1,..]``, a bracket ``[s1,..]`` or a model ``sz:2,1``."""
    src = text.strip()
    offset = len(text) - len(text.lstrip())
    if src.startswith("["):
        if not src.endswith("]"):
            raise ParseError("missing closing ']'", text, offset + len(src))
        inner_end = len(src) - 1
        bar = src.find("|")
        if bar == -1:
            s = _int_list(text, offset + 1, offset + inner_end)
            r = (0,) * len(s)
        else:
            if src.count("|") > 1:
                raise ParseError("more than one '|'", text, offset + src.rfind("|"))
            s = _int_list(text, offset + 1, offset + bar)
            r = _int_list(text, offset + bar + 1, offset + inner_end)
            if len(s) != len(r):
                raise ParseError(f"{len(s)} entries above the bar but {len(r)} below", text, offset + bar)
        if any(x < 1 for x in s):
            raise ParseError("entries s_i must be >= 1", text, offset + 1)
        return BiBracketIndex(s, r)
    name, colon, rest = src.partition(":")
    if not colon:
        raise ParseError("expected '[' or a model prefix such as 'sz:'", text, offset)
    model = _MODEL_NAMES.get(name.strip().lower())
    if model is None:
        raise ParseError(f"unknown model {name.strip()!r}; choose from {sorted(_MODEL_NAMES)}", text, offset)
    start = offset + len(name) + 1
    s = _int_list(text, start, start + len(rest))
    if not s:
        raise ParseError("a model needs at least one argument", text, start)
    return model_spec(model, s)


def parse_range(text: str) -> list:
    """``4..10``, ``3`` or ``1,2,5``."""
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if m:
        return list(range(int(m.group(1)), int(m.group(2)) + 1))
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise ParseError("expected a range like 4..10 or a list like 1,2,5", text, 0) from None


def parse_n(text: str):
    if text in ("auto", "rows"):
        return text
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n expects an integer, 'auto' or 'rows', got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("--n must be non-negative")
    return n


def parse_primes(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--primes expects comma-separated integers, got {text!r}") from None


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


# ---------------------------------------------------------------------------
# commands


def _emit(text: str, out) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def cmd_expand(args, out) -> int:
    target = parse_target(args.target)
    N = 20 if args.n in (None, "auto", "rows") else args.n
    ring = RingSpec.prime_field(args.prime) if args.prime else RingSpec.rational()
    if isinstance(target, BiBracketIndex):
        series = bibracket_series(target, N, ring)
    else:
        series = zeta_q_series(target, N, ring)
    coeffs = [str(c) for c in series.tolist()]
    if args.format == "json":
        payload = {"target": args.target.strip(), "N": N, "ring": str(ring), "coefficients": coeffs}
        _emit(json.dumps(payload, sort_keys=True), out)
    elif args.format == "csv":
        _emit("n,coefficient\n" + "".join(f"{n},{c}\n" for n, c in enumerate(coeffs)), out)
    elif args.format == "markdown":
        _emit("| n | coefficient |\n|---|---|\n" + "".join(f"| {n} | {c} |\n" for n, c in enumerate(coeffs)), out)
    else:
        _emit(", ".join(coeffs), out)
    return 0


def _render(report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        return report.to_csv()
    md = report.to_markdown()
    if fmt == "markdown":
        return md
    cfg = ", ".join(f"{k}={v}" for k, v in sorted(report.config.items()))
    counts: dict = {}
    for _, _, s in report.comparison().values():
        counts[s] = counts.get(s, 0) + 1
    summary = ", ".join(f"{v} {k}" for k, v in sorted(counts.items())) or "no reference values"
    lines = [f"{report.kind} table ({cfg})", md.rstrip(), f"cells: {summary}"]
    if report.stability:
        st = report.stability
        lines.append(f"stability: ranks at N={st['N']} and N'={st['N_prime']} {'agree' if st['stable'] else 'DIFFER'}")
    return "\n".join(lines)


def _cache(args):
    directory = args.cache_dir or default_cache_dir()
    return SeriesCache(directory) if directory else None


def cmd_table(args, out) -> int:
    cfg = RunConfig(
        primes=args.primes,
        N=args.n if args.n is not None else "auto",
        max_weight=args.max_weight,
        max_depth=args.max_depth if args.max_depth is not None else args.max_weight,
        family=args.family,
        threads=args.threads,
        output=args.format,
    )
    report = table_report(
        args.kind,
        cfg.max_weight,
        cfg.max_depth,
        family=cfg.family,
        N=cfg.N,
        primes=cfg.primes,
        workers=cfg.threads,
        stability_offset=args.stability_offset,
        cache=_cache(args),
    )
    _emit(_render(report, args.format), out)
    stable = report.stability is None or report.stability["stable"]
    return 0 if report.all_match and stable else 1


def cmd_psdim(args, out) -> int:
    report = psdim_report(parse_range(args.k), parse_range(args.l), args.mode)
    if args.format == "text":
        ls = sorted({l for _, l in report.table.entries})
        lines = []
        for l in ls:
            values = [str(v) for (k, ll), v in sorted(report.table.entries.items()) if ll == l]
            lines.append(f"l={l}: " + ", ".join(values))
        text = "\n".join(lines)
    else:
        text = _render(report, args.format)
    _emit(text, out)
    return 0 if report.all_match else 1


def cmd_check(args, out) -> int:
    caps = {"K": args.k, "max_weight": args.max_weight, "primes": args.primes, "workers": args.threads}
    if isinstance(args.n, int):
        caps["N"] = args.n
    report = run_check(args.name, **caps)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), sort_keys=True, indent=2), out)
    else:
        _emit(f"{report.name}: {'pass' if report.passed else 'FAIL'}: {report.detail}", out)
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--n", type=parse_n, default=None, help="truncation order, or 'auto'")
    common.add_argument("--primes", type=parse_primes, default=(DEFAULT_PRIME, SECOND_PRIME))
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument(
        "--cache-dir", default=None, help=f"series cache directory (default: ${CACHE_ENV} if set)"
    )

    parser = argparse.ArgumentParser(prog="qmzv", description="Bi-bracket q-series, dimension tables and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="print the q-expansion of an index or model")
    p.add_argument("target", help="e.g. '[2|0]', '[1,2]', '[|]' or 'sz:2,1'")
    p.add_argument("--prime", type=int, default=None, help="reduce modulo this prime instead of working over Q")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("table", parents=[common], help="fil / gr / generators / lie tables")
    p.add_argument("kind", choices=TABLE_KINDS)
    p.add_argument("--max-weight", type=int, default=4)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--family", choices=[f.value for f in IndexFamily], default="all")
    p.add_argument("--stability-offset", type=int, default=0, help="also recompute at N + offset")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("psdim", parents=[common], help="dimensions of partition shuffle spaces")
    p.add_argument("--k", required=True, help="weights, e.g. 4..10")
    p.add_argument("--l", required=True, help="depths, e.g. 2 or 1..3")
    p.add_argument("--mode", choices=("exact", "modp"), default="exact")
    p.set_defaults(func=cmd_psdim)

    p = sub.add_parser("check", parents=[common], help="run a named identity or membership check")
    p.add_argument("name", help="one of: " + ", ".join(sorted(CHECKS)))
    p.add_argument("--k", type=int, default=None, help="series order for the generating-series checks")
    p.add_argument("--max-weight", type=int, default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (QMZVError, ArithmeticError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
