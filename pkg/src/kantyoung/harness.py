"""Seeded instance generation, batch verification and slack reporting.

Every instance draws from its own generator seeded by ``(seed, index,
stream)``, so results do not depend on evaluation order and records can be
computed in any order before the final sort by instance id.
"""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
from collections.abc import Iterator
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import scalar
from .dense import SpdMatrix
from .errors import UsageError
from .hsnorm import HsInstance, hs_chain_check, hs_reverse_check
from .operators import OrderedPair, liao_wu_baseline_check, op_chain_check, op_heinz_check, op_reverse_check
from .oracle import highprec_chain_oracle

ORACLE_TOL = 1e-12
DYADIC_TOL = 1e-10

# stream tags for the per-instance seed sequences
_SCALAR_STREAM, _MATRIX_STREAM, _HS_STREAM = 1, 2, 3

SCALAR_IDS = (
    "y1L", "y1R", "y2", "y3L", "y3R", "y4", "y5L", "y5R", "y6", "heinzL", "heinzR", "heinz_rev",
)
BASELINE_IDS = tuple(
    "base_" + k
    for k in ("km", "km_rev", "squared", "kant_lower", "kant_reverse", "kant_upper", "liao_wu_lower", "liao_wu_upper")
)
OPERATOR_IDS = (
    "op_chainL", "op_chainR", "op_rev", "op_heinzL", "op_heinzR", "op_heinz_rev", "op_liao_wuL", "op_liao_wuR",
)
HS_IDS = ("hs_chainL", "hs_chainR", "hs_rev")
AUX_IDS = ("dyadic_eq", "oracle")
ALL_IDS = SCALAR_IDS + BASELINE_IDS + OPERATOR_IDS + HS_IDS + AUX_IDS


@dataclass(frozen=True)
class CaseSpec:
    """Parameters of a verification sweep.

    Scalar cases draw ``a`` and ``h = b/a`` log-uniformly from their ranges
    and ``n`` uniformly from ``n_set``; ``nu_set="random"`` draws ``nu``
    uniformly from (0, 1). Matrix cases draw dimension, gap factor, weight and
    depth uniformly from the listed sets.
    """

    seed: int = 0
    count: int = 10_000
    a_range: tuple[float, float] = (1e-3, 1e3)
    h_range: tuple[float, float] = (1e-6, 1e6)
    nu_set: tuple[float, ...] | str = "random"
    n_set: tuple[int, ...] = tuple(range(1, 9))
    dims: tuple[int, ...] = (1, 2, 3, 5, 8)
    matrix_count: int = 100
    gap_factors: tuple[float, ...] = (1.0, 1.5, 10.0)
    matrix_nus: tuple[float, ...] = (0.1, 0.25, 0.5, 0.7, 0.9)
    matrix_depths: tuple[int, ...] = (1, 2, 3)
    hs_eig_range: tuple[float, float] = (0.1, 10.0)
    oracle_stride: int = 10

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.count < 0 or self.matrix_count < 0:
            raise UsageError("case counts must be nonnegative")
        for name in ("a_range", "h_range", "hs_eig_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise UsageError(f"{name} must satisfy 0 < lo <= hi < inf, got {(lo, hi)}")
        if self.nu_set != "random":
            if not self.nu_set or not all(0 <= v <= 1 for v in self.nu_set):
                raise UsageError("nu_set must be 'random' or a nonempty list of weights in [0, 1]")
        for name in ("n_set", "dims", "gap_factors", "matrix_nus", "matrix_depths"):
            if not getattr(self, name):
                raise UsageError(f"{name} must be nonempty")
        if min(self.n_set) < 1 or min(self.matrix_depths) < 1 or min(self.dims) < 1:
            raise UsageError("depths and dimensions must be positive")
        if min(self.gap_factors) < 1:
            raise UsageError("gap factors must be >= 1")
        if self.oracle_stride < 0:
            raise UsageError("oracle_stride must be nonnegative")


@dataclass(frozen=True)
class ScalarCase:
    id: str
    a: float
    b: float
    nu: float | Fraction
    n: int
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class MatrixCase:
    id: str
    A: SpdMatrix
    B: SpdMatrix
    nu: float
    n: int
    gap: float
    hs: HsInstance | None = None


def _rng(*key) -> np.random.Generator:
    return np.random.default_rng([int(k) for k in key])


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def _forced_scalar_cases() -> list[tuple[float, float, float | Fraction, int, tuple[str, ...]]]:
    out = [
        (2.5, 2.5, 0.3, 3, ("equal",)),
        (1.0, 1.0, Fraction(1, 3), 1, ("equal",)),
        (7.0, 7.0, Fraction(5, 8), 2, ("equal", "dyadic")),
    ]
    for nu in (Fraction(0), Fraction(1), Fraction(1, 2)):
        out.append((1.0, 4.0, nu, 2, ("endpoint",)))
    for t in range(2, 11):
        for p in sorted({1, 2 ** (t - 1) - 1, 2 ** (t - 1) + 1, 2**t - 1}):
            out.append((1.0, 16.0, Fraction(p, 2**t), t - 1, ("dyadic",)))
    for h in (1 + 1e-8, 1 - 1e-8, 1e6, 1e-6):
        for n in (1, 4, 8):
            out.append((1.0, h, 0.3, n, ("extreme_h",)))
    return out


def gen_scalar_cases(spec: CaseSpec) -> Iterator[ScalarCase]:
    """Forced edge cases followed by ``spec.count`` random cases.

    Random case ``i`` depends only on ``(spec.seed, i)``.
    """
    for i, (a, b, nu, n, tags) in enumerate(_forced_scalar_cases()):
        yield ScalarCase(f"se-{i:04d}", a, b, nu, n, tags)
    alo, ahi = spec.a_range
    hlo, hhi = spec.h_range
    for i in range(spec.count):
        rng = _rng(spec.seed, i, _SCALAR_STREAM)
        a = _log_uniform(rng, alo, ahi)
        h = _log_uniform(rng, hlo, hhi)
        if spec.nu_set == "random":
            nu = float(rng.uniform(0.0, 1.0))
            while nu == 0.0:
                nu = float(rng.uniform(0.0, 1.0))
        else:
            nu = spec.nu_set[int(rng.integers(len(spec.nu_set)))]
        n = int(spec.n_set[int(rng.integers(len(spec.n_set)))])
        yield ScalarCase(f"sr-{i:06d}", a, a * h, nu, n)


def random_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Product of ``dim`` Householder reflections ``I - 2 v v^T`` with random unit ``v``."""
    Q = np.eye(dim)
    for _ in range(dim):
        v = rng.standard_normal(dim)
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v /= nv
        Q = Q - 2.0 * np.outer(Q @ v, v)
    return Q


def gen_spd(seed, dim: int, eig_lo: float, eig_hi: float) -> SpdMatrix:
    """``Q diag(lam) Q^T`` with ``lam`` uniform in ``[eig_lo, eig_hi]``.

    ``seed`` is an integer or a sequence of integers.
    """
    if not (0 < eig_lo <= eig_hi and math.isfinite(eig_hi)):
        raise UsageError(f"need 0 < eig_lo <= eig_hi, got [{eig_lo}, {eig_hi}]")
    if dim < 1:
        raise UsageError(f"dimension must be positive, got {dim}")
    key = seed if isinstance(seed, (list, tuple)) else [seed]
    rng = _rng(*key)
    lam = rng.uniform(eig_lo, eig_hi, dim)
    Q = random_orthogonal(rng, dim)
    return SpdMatrix((Q * lam) @ Q.T)


def gen_ordered_pair(seed, dim: int, gap_factor: float) -> OrderedPair:
    """``A`` with spectrum in [1, 2] and ``B`` with spectrum in ``[2g, 4g]``."""
    if not gap_factor >= 1:
        raise UsageError(f"gap factor must be >= 1, got {gap_factor}")
    key = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    A = gen_spd(key + [0], dim, 1.0, 2.0)
    B = gen_spd(key + [1], dim, 2.0 * gap_factor, 4.0 * gap_factor)
    return OrderedPair(A, B)


def gen_matrix_cases(spec: CaseSpec) -> Iterator[MatrixCase]:
    """The forced ``A = B = X = I`` case, then ``spec.matrix_count`` random cases.

    Each random case carries an ordered pair for the operator checks and an
    independent triple ``(A', B', X)`` for the Hilbert-Schmidt checks, since
    the latter need no spectral ordering.
    """
    eye = np.eye(3)
    I3 = SpdMatrix(eye)
    yield MatrixCase("me-0000", I3, I3, 0.5, 1, 1.0, HsInstance(I3, I3, eye))
    lo, hi = spec.hs_eig_range
    for i in range(spec.matrix_count):
        rng = _rng(spec.seed, i, _MATRIX_STREAM)
        dim = int(spec.dims[int(rng.integers(len(spec.dims)))])
        gap = float(spec.gap_factors[int(rng.integers(len(spec.gap_factors)))])
        nu = float(spec.matrix_nus[int(rng.integers(len(spec.matrix_nus)))])
        n = int(spec.matrix_depths[int(rng.integers(len(spec.matrix_depths)))])
        pair = gen_ordered_pair([spec.seed, i, _MATRIX_STREAM], dim, gap)
        hs_key = [spec.seed, i, _HS_STREAM]
        X = _rng(*hs_key, 2).uniform(-1.0, 1.0, (dim, dim))
        hs = HsInstance(gen_spd(hs_key + [0], dim, lo, hi), gen_spd(hs_key + [1], dim, lo, hi), X)
        yield MatrixCase(f"mr-{i:04d}", pair.A, pair.B, nu, n, gap, hs)


@dataclass(frozen=True)
class SlackRecord:
    """One evaluated inequality on one instance.

    ``slack`` is ``rhs - lhs`` for scalar checks and the smallest eigenvalue
    of the difference for Loewner checks; ``rel_slack`` divides by the
    record's scale. ``passed`` holds iff ``rel_slack >= -tol`` and no error
    occurred.
    """

    instance: str
    check: str
    nu: str
    n: int
    h: float
    dim: int
    lhs: float | None
    rhs: float | None
    slack: float
    rel_slack: float
    tol: float
    passed: bool
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepOptions:
    """Evaluation switches; the defaults are the supported readings."""

    tol: float = scalar.DEFAULT_TOL
    hs_sign: str = "plus"
    op_upper_h: str = "gap"
    reverse_sums: str = "proof"
    oracle: bool = True


def _from_ineq(case_id, rep: scalar.InequalityReport, nu, n, h, check=None) -> SlackRecord:
    return SlackRecord(
        case_id, check or rep.name, str(nu), n, h, 1, rep.lhs, rep.rhs, rep.slack, rep.rel_slack, rep.tol, rep.passed
    )


def _error_record(case_id, check, nu, n, h, dim, tol, exc) -> SlackRecord:
    return SlackRecord(
        case_id, check, str(nu), n, h, dim, None, None, math.nan, math.nan, tol, False, f"{type(exc).__name__}: {exc}"
    )


def _oracle_record(case: ScalarCase, tol: float) -> SlackRecord:
    # lhs: worst relative disagreement between double and extended precision
    ref = highprec_chain_oracle(case.a, case.b, case.nu, case.n)
    got = {
        "y1": scalar.chain_y1(case.a, case.b, case.nu, case.n),
        "y3": scalar.chain_y3(case.a, case.b, case.nu, case.n),
        "y5": scalar.chain_y5(case.a, case.b, case.nu, case.n),
        "heinz": scalar.heinz_chain(case.a, case.b, case.nu, case.n),
        "y2": scalar.reverse_y2(case.a, case.b, case.nu, case.n),
        "y4": scalar.reverse_y4(case.a, case.b, case.nu, case.n),
        "y6": scalar.reverse_y6(case.a, case.b, case.nu, case.n),
        "heinz_rev": scalar.heinz_reverse(case.a, case.b, case.nu, case.n),
    }
    worst = 0.0
    for fam, res in got.items():
        vals = (res.lower, res.middle, res.upper) if isinstance(res, scalar.ChainResult) else (res.lhs, res.rhs)
        for v, r in zip(vals, ref[fam]):
            worst = max(worst, float(abs(v - r) / abs(r)) if r else abs(v))
    slack = ORACLE_TOL - worst
    return SlackRecord(
        case.id, "oracle", str(case.nu), case.n, case.b / case.a, 1, worst, ORACLE_TOL,
        slack, slack / ORACLE_TOL, 0.0, slack >= 0,
    )


def _dyadic_record(case: ScalarCase) -> SlackRecord:
    w = scalar.Weight.of(case.nu)
    p, t = w.dyadic
    rep = scalar.dyadic_equality(case.a, case.b, p, t, DYADIC_TOL)
    slack = DYADIC_TOL - rep.rel_spread
    return SlackRecord(
        case.id, "dyadic_eq", str(case.nu), rep.n, case.b / case.a, 1, rep.rel_spread, DYADIC_TOL,
        slack, slack / DYADIC_TOL, 0.0, rep.passed,
    )


def scalar_records(case: ScalarCase, opts: SweepOptions, with_oracle: bool = False) -> list[SlackRecord]:
    """Every scalar chain, reverse bound and baseline on one case."""
    a, b, nu, n, tol = case.a, case.b, case.nu, case.n, opts.tol
    h = b / a
    out: list[SlackRecord] = []
    chains = (scalar.chain_y1, scalar.chain_y3, scalar.chain_y5, scalar.heinz_chain)
    reverses = (
        lambda: scalar.reverse_y2(a, b, nu, n, tol),
        lambda: scalar.reverse_y4(a, b, nu, n, tol),
        lambda: scalar.reverse_y6(a, b, nu, n, tol, sum_form=opts.reverse_sums),
        lambda: scalar.heinz_reverse(a, b, nu, n, tol),
    )
    for fn in chains:
        name = fn.__name__
        try:
            for rep in fn(a, b, nu, n).reports(tol):
                out.append(_from_ineq(case.id, rep, nu, n, h))
        except (ValueError, ArithmeticError) as exc:
            out.append(_error_record(case.id, name, nu, n, h, 1, tol, exc))
    for fn in reverses:
        try:
            out.append(_from_ineq(case.id, fn(), nu, n, h))
        except (ValueError, ArithmeticError) as exc:
            out.append(_error_record(case.id, "reverse", nu, n, h, 1, tol, exc))
    try:
        for rep in scalar.baseline_bounds(a, b, nu, tol).values():
            out.append(_from_ineq(case.id, rep, nu, 1, h))
    except (ValueError, ArithmeticError) as exc:
        out.append(_error_record(case.id, "baselines", nu, 1, h, 1, tol, exc))
    if "dyadic" in case.tags:
        out.append(_dyadic_record(case))
    if with_oracle:
        try:
            out.append(_oracle_record(case, tol))
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            out.append(_error_record(case.id, "oracle", nu, n, h, 1, tol, exc))
    return out


def _loewner_records(case_id, rep, left_id, right_id=None) -> list[SlackRecord]:
    out = []
    for check, lr in ((left_id, rep.left), (right_id, rep.right)):
        if check is None or lr is None:
            continue
        out.append(SlackRecord(
            case_id, check, str(rep.nu), rep.n, rep.h, rep.dim, None, None,
            lr.lambda_min, lr.rel_slack, lr.tol, lr.passed,
        ))
    return out


def _hs_records(case_id, rep) -> list[SlackRecord]:
    out = []
    for ir in (rep.left, rep.right):
        if ir is None:
            continue
        out.append(SlackRecord(
            case_id, ir.name, str(rep.nu), rep.t, math.nan, rep.dim, ir.lhs, ir.rhs,
            ir.slack, ir.rel_slack, ir.tol, ir.passed,
        ))
    return out


def matrix_records(case: MatrixCase, opts: SweepOptions) -> list[SlackRecord]:
    """Operator checks on the ordered pair and HS checks on the triple."""
    tol, nu, n = opts.tol, case.nu, case.n
    out: list[SlackRecord] = []
    try:
        pair = OrderedPair(case.A, case.B)
    except (ValueError, ArithmeticError) as exc:
        return [_error_record(case.id, "op_pair", nu, n, math.nan, case.A.dim, tol, exc)]
    steps = (
        (lambda: op_chain_check(pair, nu, n, tol, upper_h=opts.op_upper_h), ("op_chainL", "op_chainR")),
        (lambda: op_reverse_check(pair, nu, n, tol, brackets=opts.reverse_sums), ("op_rev", None)),
        (lambda: liao_wu_baseline_check(pair, nu, tol), ("op_liao_wuL", "op_liao_wuR")),
    )
    for fn, ids in steps:
        try:
            out += _loewner_records(case.id, fn(), *ids)
        except (ValueError, ArithmeticError) as exc:
            out.append(_error_record(case.id, ids[0], nu, n, pair.h, pair.dim, tol, exc))
    try:
        chain, rev = op_heinz_check(pair, nu, n, tol, upper_h=opts.op_upper_h)
        out += _loewner_records(case.id, chain, "op_heinzL", "op_heinzR")
        out += _loewner_records(case.id, rev, "op_heinz_rev")
    except (ValueError, ArithmeticError) as exc:
        out.append(_error_record(case.id, "op_heinz", nu, n, pair.h, pair.dim, tol, exc))
    if case.hs is not None:
        try:
            out += _hs_records(case.id, hs_chain_check(case.hs, nu, n, tol, sign=opts.hs_sign))
            out += _hs_records(
                case.id, hs_reverse_check(case.hs, nu, n, tol, sign=opts.hs_sign, sum_form=opts.reverse_sums)
            )
        except (ValueError, ArithmeticError) as exc:
            out.append(_error_record(case.id, "hs", nu, n, math.nan, case.hs.dim, tol, exc))
    return out


def slack_sweep(spec: CaseSpec, opts: SweepOptions | None = None) -> list[SlackRecord]:
    """Run every applicable check on the cases of ``spec``.

    Errors are captured per record and the sweep continues. The result is
    sorted by ``(instance, check)`` and is identical for identical input.
    The oracle comparison runs on every ``oracle_stride``-th random scalar
    case.
    """
    opts = opts or SweepOptions()
    out: list[SlackRecord] = []
    stride = spec.oracle_stride if opts.oracle else 0
    for case in gen_scalar_cases(spec):
        idx = int(case.id.split("-")[1])
        with_oracle = bool(stride) and case.id.startswith("sr") and idx % stride == 0
        out += scalar_records(case, opts, with_oracle)
    for case in gen_matrix_cases(spec):
        out += matrix_records(case, opts)
    out.sort(key=lambda r: (r.instance, r.check))
    return out


@dataclass(frozen=True)
class CheckSummary:
    check: str
    count: int
    failures: int
    errors: int
    min_rel_slack: float
    mean_rel_slack: float
    worst_instance: str


@dataclass(frozen=True)
class SweepSummary:
    checks: tuple[CheckSummary, ...]
    missing: tuple[str, ...] = field(default=())

    @property
    def total(self) -> int:
        return sum(c.count for c in self.checks)

    @property
    def failures(self) -> int:
        return sum(c.failures for c in self.checks)

    @property
    def all_passed(self) -> bool:
        return self.failures == 0


def summarize(records: list[SlackRecord], expected=ALL_IDS) -> SweepSummary:
    """Per-check count, failures and min/mean relative slack, plus the ids in
    ``expected`` that no record exercised."""
    groups: dict[str, list[SlackRecord]] = {}
    for rec in records:
        groups.setdefault(rec.check, []).append(rec)
    rows = []
    for check in sorted(groups):
        recs = groups[check]
        finite = [r for r in recs if r.error is None and math.isfinite(r.rel_slack)]
        worst = min(finite, key=lambda r: r.rel_slack) if finite else recs[0]
        rows.append(CheckSummary(
            check,
            len(recs),
            sum(not r.passed for r in recs),
            sum(r.error is not None for r in recs),
            worst.rel_slack if finite else math.nan,
            statistics.fmean(r.rel_slack for r in finite) if finite else math.nan,
            worst.instance,
        ))
    missing = tuple(c for c in expected if c not in groups)
    return SweepSummary(tuple(rows), missing)


def _fmt17(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def records_to_jsonl(records: list[SlackRecord]) -> str:
    return "".join(json.dumps(r.to_dict()) + "\n" for r in records)


def records_to_csv(records: list[SlackRecord]) -> str:
    buf = io.StringIO()
    cols = list(SlackRecord.__dataclass_fields__)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        d = r.to_dict()
        w.writerow([_fmt17(d[c]) for c in cols])
    return buf.getvalue()


def format_summary(summary: SweepSummary) -> str:
    """Fixed-width table of the per-check summary (12 significant digits)."""
    head = f"{'check':<20} {'count':>7} {'fail':>6} {'err':>5} {'min rel slack':>20} {'mean rel slack':>20}  worst"
    lines = [head, "-" * len(head)]
    for c in summary.checks:
        lines.append(
            f"{c.check:<20} {c.count:>7} {c.failures:>6} {c.errors:>5} "
            f"{c.min_rel_slack:>20.12g} {c.mean_rel_slack:>20.12g}  {c.worst_instance}"
        )
    lines.append("")
    lines.append(f"records: {summary.total}  failures: {summary.failures}")
    if summary.missing:
        lines.append("not exercised: " + ", ".join(summary.missing))
    else:
        lines.append("coverage: every check id exercised")
    return "\n".join(lines) + "\n"


def tightness_row(a: float, b: float, nu, n: int, tol: float = scalar.DEFAULT_TOL) -> dict:
    """Slack of the depth-``n`` bounds on ``a∇b`` next to the baselines.

    Each bound is rewritten as a bound on ``a∇b`` itself, and slack is the
    distance from ``a∇b`` to the bound (nonnegative when the bound holds).
    ``tight_*`` columns subtract the best baseline slack of the same kind, so
    negative values mean the depth-``n`` bound is sharper.
    """
    w = scalar.Weight.of(nu)
    x = w.nu
    c = scalar.chain_y1(a, b, w, n)
    rev = scalar.reverse_y2(a, b, w, n, tol)
    base = scalar.baseline_bounds(a, b, w, tol)
    lower_slack = c.middle - c.lower
    upper_slack = c.upper - c.middle
    base_lower = {k: base[k].slack for k in ("km", "kant_lower", "liao_wu_lower")}
    base_upper = {k: base[k].slack for k in ("km_rev", "kant_upper", "liao_wu_upper")}
    row = {
        "nu": str(w), "h": b / a, "n": n, "a": a, "b": b,
        "arith": scalar.arith_mean(a, b, x),
        "lower": c.lower, "middle": c.middle, "upper": c.upper,
        "lower_slack": lower_slack, "upper_slack": upper_slack, "reverse_slack": rev.slack,
    }
    row.update({f"base_{k}_slack": v for k, v in {**base_lower, **base_upper}.items()})
    row["base_kant_reverse_slack"] = base["kant_reverse"].slack
    row["tight_lower"] = lower_slack - min(base_lower.values())
    row["tight_upper"] = upper_slack - min(base_upper.values())
    row["tight_reverse"] = rev.slack - base["kant_reverse"].slack
    reports = list(c.reports(tol)) + [rev] + list(base.values())
    row["pass"] = all(r.passed for r in reports)
    return row


__all__ = [
    "ALL_IDS",
    "CaseSpec",
    "ScalarCase",
    "MatrixCase",
    "SlackRecord",
    "SweepOptions",
    "SweepSummary",
    "gen_scalar_cases",
    "gen_matrix_cases",
    "gen_spd",
    "gen_ordered_pair",
    "random_orthogonal",
    "scalar_records",
    "matrix_records",
    "slack_sweep",
    "summarize",
    "format_summary",
    "records_to_jsonl",
    "records_to_csv",
    "tightness_row",
    "highprec_chain_oracle",
]
