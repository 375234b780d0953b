"""Command-line interface: ``verify``, ``eval`` and ``sweep``.

Exit codes: 0 when every evaluated inequality holds, 1 when any fails, 2 on
usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import scalar
from .dense import read_matrix
from .errors import DomainError, HypothesisError, NumericError, UsageError
from .harness import (
    CaseSpec,
    SweepOptions,
    format_summary,
    records_to_csv,
    records_to_jsonl,
    slack_sweep,
    summarize,
    tightness_row,
)
from .hsnorm import SIGN_CHOICES, SUM_FORMS, HsInstance, hs_chain_check, hs_reverse_check
from .operators import UPPER_H_CHOICES, OrderedPair, liao_wu_baseline_check, op_chain_check, op_heinz_check, op_reverse_check

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_LISTED_FAILURES = 20


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "pass" if v else "FAIL"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _table(rows: list[dict], cols: list[str]) -> str:
    cells = [[_fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _csv(rows: list[dict], cols: list[str]) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow(["" if r.get(c) is None else (f"{r[c]:.17g}" if isinstance(r[c], float) else r[c]) for c in cols])
    return buf.getvalue()


def _json_default(v):
    return str(v)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _depth(n: int, cap: int) -> int:
    if n < 1:
        raise UsageError(f"depth must be >= 1, got {n}")
    if n > cap:
        print(f"warning: depth {n} clamped to {cap}", file=sys.stderr)
        return cap
    return n


def _check_common(args) -> None:
    if not (args.tol > 0 and math.isfinite(args.tol)):
        raise UsageError(f"--tol must be a positive number, got {args.tol}")
    if not 1 <= args.depth_cap <= scalar.DEPTH_CAP:
        raise UsageError(f"--depth-cap must lie in 1..{scalar.DEPTH_CAP}, got {args.depth_cap}")


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    _check_common(args)
    spec = CaseSpec(
        seed=args.seed,
        count=args.count,
        matrix_count=args.matrix_count,
        n_set=tuple(sorted({min(n, args.depth_cap) for n in range(1, 9)})),
        matrix_depths=tuple(sorted({min(n, args.depth_cap) for n in (1, 2, 3)})),
        oracle_stride=args.oracle_stride,
    )
    opts = SweepOptions(
        tol=args.tol, hs_sign=args.hs_sign, op_upper_h=args.op_upper_h, reverse_sums=args.reverse_sums
    )
    records = slack_sweep(spec, opts)
    summary = summarize(records)
    if args.out:
        fmt = "csv" if args.format == "csv" else "json"
        Path(args.out).write_text(records_to_csv(records) if fmt == "csv" else records_to_jsonl(records))
    text = format_summary(summary)
    failed = [r for r in records if not r.passed]
    if failed:
        text += "\nfailing records"
        if len(failed) > MAX_LISTED_FAILURES:
            text += f" (first {MAX_LISTED_FAILURES} of {len(failed)})"
        text += ":\n"
        for r in failed[:MAX_LISTED_FAILURES]:
            detail = r.error or (
                f"lhs={_fmt(r.lhs)} rhs={_fmt(r.rhs)} " if r.lhs is not None else ""
            ) + f"rel_slack={_fmt(r.rel_slack)}"
            text += f"  FAIL {r.instance} {r.check} nu={r.nu} n={r.n} dim={r.dim} {detail}\n"
    sys.stdout.write(text)
    return EXIT_OK if summary.all_passed else EXIT_FAIL


# ---------------------------------------------------------------- eval

_EVAL_COLS = ["check", "lower", "middle", "upper", "rel_slack", "pass"]


def _chain_rows(res: scalar.ChainResult, tol: float) -> list[dict]:
    left, right = res.reports(tol)
    return [{
        "check": res.name, "lower": res.lower, "middle": res.middle, "upper": res.upper,
        "rel_slack": min(left.rel_slack, right.rel_slack), "pass": left.passed and right.passed,
    }]


def _ineq_row(rep: scalar.InequalityReport) -> dict:
    return {"check": rep.name, "lower": rep.lhs, "middle": None, "upper": rep.rhs,
            "rel_slack": rep.rel_slack, "pass": rep.passed}


def _scalar_eval(args) -> tuple[list[dict], list[str]]:
    try:
        a, b = float(args.instance[0]), float(args.instance[1])
        n = int(args.instance[3])
    except ValueError:
        raise UsageError("eval expects: a b nu n") from None
    w = scalar.parse_weight(args.instance[2])
    n = _depth(n, args.depth_cap)
    tol = args.tol
    rows = []
    for fn in (scalar.chain_y1, scalar.chain_y3, scalar.chain_y5, scalar.heinz_chain):
        rows += _chain_rows(fn(a, b, w, n), tol)
    rows.append(_ineq_row(scalar.reverse_y2(a, b, w, n, tol)))
    rows.append(_ineq_row(scalar.reverse_y4(a, b, w, n, tol)))
    rows.append(_ineq_row(scalar.reverse_y6(a, b, w, n, tol, sum_form=args.reverse_sums)))
    rows.append(_ineq_row(scalar.heinz_reverse(a, b, w, n, tol)))
    for rep in scalar.baseline_bounds(a, b, w, tol).values():
        rows.append(_ineq_row(rep))
    notes = []
    dy = w.dyadic
    if dy is not None and dy[1] >= 2 and n == dy[1] - 1:
        eq = scalar.dyadic_equality(a, b, dy[0], dy[1])
        rows.append({"check": "dyadic_eq", "lower": eq.lower, "middle": eq.middle, "upper": eq.upper,
                     "rel_slack": 0.0 - eq.rel_spread, "pass": eq.passed})
        notes.append("equality (dyadic)" if eq.passed else "dyadic equality FAILED")
    return rows, notes


def _matrix_eval(args) -> tuple[list[dict], list[str]]:
    if args.nu is None or args.n is None:
        raise UsageError("matrix eval needs --nu and --n")
    w = scalar.parse_weight(args.nu)
    n = _depth(args.n, args.depth_cap)
    tol = args.tol
    A, B = read_matrix(args.A), read_matrix(args.B)
    rows, notes = [], []

    def op_row(rep, check, right=True):
        return {
            "check": check, "dim": rep.dim, "h": rep.h,
            "lambda_min_left": rep.lambda_min_left,
            "lambda_min_right": rep.lambda_min_right if right else None,
            "rel_slack": min(s.rel_slack for s in (rep.left, rep.right) if s is not None),
            "pass": rep.passed,
        }

    try:
        pair = OrderedPair(A, B)
    except HypothesisError as exc:
        if args.X is None:
            raise
        notes.append(f"operator checks skipped: {exc}")
    else:
        rows.append(op_row(op_chain_check(pair, w, n, tol, upper_h=args.op_upper_h), "op_chain"))
        rows.append(op_row(op_reverse_check(pair, w, n, tol, brackets=args.reverse_sums), "op_rev"))
        chain, rev = op_heinz_check(pair, w, n, tol, upper_h=args.op_upper_h)
        rows.append(op_row(chain, "op_heinz"))
        rows.append(op_row(rev, "op_heinz_rev"))
        rows.append(op_row(liao_wu_baseline_check(pair, w, tol), "op_liao_wu"))
    if args.X is not None:
        inst = HsInstance(A, B, read_matrix(args.X))
        for rep in (
            hs_chain_check(inst, w, n, tol, sign=args.hs_sign),
            hs_reverse_check(inst, w, n, tol, sign=args.hs_sign, sum_form=args.reverse_sums),
        ):
            rows.append({
                "check": rep.name, "dim": rep.dim, "lower": rep.lower, "middle": rep.middle,
                "upper": rep.upper, "rel_slack": min(rep.slacks), "pass": rep.passed,
                "sign_variant": rep.sign_variant,
            })
    return rows, notes


def cmd_eval(args) -> int:
    _check_common(args)
    matrix_mode = args.A is not None or args.B is not None
    if matrix_mode:
        if args.A is None or args.B is None or args.instance:
            raise UsageError("matrix eval takes --A and --B (and optionally --X) but no positional values")
        rows, notes = _matrix_eval(args)
        cols = ["check", "dim", "h", "lambda_min_left", "lambda_min_right", "lower", "middle", "upper",
                "rel_slack", "pass"]
        cols = [c for c in cols if any(r.get(c) is not None for r in rows)]
    else:
        if len(args.instance) != 4:
            raise UsageError("eval expects: a b nu n")
        rows, notes = _scalar_eval(args)
        cols = _EVAL_COLS
    if args.format == "json":
        text = json.dumps({"results": rows, "notes": notes}, indent=2, default=_json_default) + "\n"
    elif args.format == "csv":
        text = _csv(rows, cols)
    else:
        text = _table(rows, cols) + "".join(note + "\n" for note in notes)
    _emit(text, args.out)
    if args.out and args.format != "table":
        sys.stdout.write("".join(note + "\n" for note in notes))
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------- sweep


def parse_grid(text: str, *, exact: bool = False) -> list:
    """``"v1,v2,..."`` or an inclusive range ``"start:stop:step"``.

    Range arithmetic is done in exact decimals, so ``0.1:0.9:0.1`` yields nine
    values. With ``exact`` set, ``"p/q"`` items are kept as fractions.
    """
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, step = (Fraction(p) for p in parts)
            if step <= 0:
                raise ValueError
            out, k = [], 0
            while start + k * step <= stop:
                out.append(float(start + k * step))
                k += 1
            return out
        items = [s.strip() for s in text.split(",") if s.strip()]
        return [Fraction(s) if exact and "/" in s else float(s) for s in items]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse grid {text!r}") from None


_SWEEP_COLS = [
    "nu", "h", "n", "lower", "middle", "upper", "lower_slack", "upper_slack", "reverse_slack",
    "base_km_slack", "base_kant_lower_slack", "base_liao_wu_lower_slack",
    "base_km_rev_slack", "base_kant_upper_slack", "base_liao_wu_upper_slack", "base_kant_reverse_slack",
    "tight_lower", "tight_upper", "tight_reverse", "pass",
]


def cmd_sweep(args) -> int:
    _check_common(args)
    nus = parse_grid(args.nu_grid, exact=True)
    hs = parse_grid(args.h_grid)
    ns = parse_grid(args.n_grid)
    if not (nus and hs and ns):
        raise UsageError("sweep grid is empty")
    if any(n != int(n) for n in ns):
        raise UsageError("depth grid must hold integers")
    if not (args.a > 0 and math.isfinite(args.a)):
        raise UsageError(f"--a must be positive, got {args.a}")
    ns = [_depth(int(n), args.depth_cap) for n in ns]
    rows = []
    for nu in nus:
        w = scalar.Weight.of(nu)
        for h in hs:
            if not h > 0:
                raise UsageError(f"h must be positive, got {h}")
            for n in ns:
                rows.append(tightness_row(args.a, args.a * h, w, n, args.tol))
    if args.format == "json":
        text = "".join(json.dumps({c: r[c] for c in _SWEEP_COLS}) + "\n" for r in rows)
    elif args.format == "csv":
        text = _csv(rows, _SWEEP_COLS)
    else:
        text = _table(rows, _SWEEP_COLS)
    _emit(text, args.out)
    bad = sum(not r["pass"] for r in rows)
    print(f"{len(rows)} grid points, {bad} failing", file=sys.stderr)
    return EXIT_OK if bad == 0 else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="sweep seed (default 0)")
    common.add_argument("--tol", type=float, default=scalar.DEFAULT_TOL, help="relative slack tolerance")
    common.add_argument("--format", choices=("json", "csv", "table"), default="table")
    common.add_argument("--out", help="write records or results to this path")
    common.add_argument("--hs-sign", choices=SIGN_CHOICES, default="plus",
                        help="sign of the combined term in the Hilbert-Schmidt checks")
    common.add_argument("--depth-cap", type=int, default=scalar.DEPTH_CAP, help="largest refinement depth")
    common.add_argument("--op-upper-h", choices=UPPER_H_CHOICES, default="gap",
                        help="ratio in the upper operator factor: m(B)/M(A) (gap) or M(B)/m(A) (spread)")
    common.add_argument("--reverse-sums", choices=SUM_FORMS, default="proof",
                        help="exponent orientation of the sums in the squared, operator and HS reverse bounds")

    p = _Parser(prog="kantyoung", description="Refined Young inequalities with Kantorovich factors.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="run the seeded verification sweep")
    v.add_argument("--count", type=int, default=10_000, help="random scalar cases")
    v.add_argument("--matrix-count", type=int, default=100, help="random matrix cases")
    v.add_argument("--oracle-stride", type=int, default=10,
                   help="compare every k-th random scalar case with the extended-precision oracle (0 disables)")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", parents=[common], help="evaluate one scalar or matrix instance")
    e.add_argument("instance", nargs="*", help="a b nu n (nu as a decimal or p/q)")
    e.add_argument("--A", help="matrix file for A")
    e.add_argument("--B", help="matrix file for B")
    e.add_argument("--X", help="matrix file for X (Hilbert-Schmidt checks)")
    e.add_argument("--nu", help="weight for matrix eval")
    e.add_argument("--n", type=int, help="depth for matrix eval")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", parents=[common], help="tightness of the chain bounds on a grid")
    s.add_argument("--nu", dest="nu_grid", default="0.1:0.9:0.1")
    s.add_argument("--h", dest="h_grid", default="2,10,100")
    s.add_argument("--n", dest="n_grid", default="1:5:1")
    s.add_argument("--a", type=float, default=1.0, help="value of a; b = a*h")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except (UsageError, DomainError, HypothesisError, NumericError, OSError) as exc:
        print(f"kantyoung: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
