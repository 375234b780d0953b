"""Scalar means, the Kantorovich constant and refined Young inequality chains.

Every chain is evaluated in double precision. Weights are carried as exact
rationals so that the refinement sequences ``r_k`` and ``m_k`` never pick up
rounding error; see :class:`Weight`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, UsageError

DEPTH_CAP = 60
DEFAULT_TOL = 1e-9

__all__ = [
    "DEPTH_CAP",
    "DEFAULT_TOL",
    "Weight",
    "parse_weight",
    "RefinementSeq",
    "ChainResult",
    "InequalityReport",
    "EqualityReport",
    "kantorovich",
    "refinement_seq",
    "arith_mean",
    "geo_mean",
    "heinz_mean",
    "refinement_sum",
    "refinement_sum_swapped",
    "chain_y1",
    "reverse_y2",
    "chain_y3",
    "reverse_y4",
    "chain_y5",
    "reverse_y6",
    "heinz_chain",
    "heinz_reverse",
    "dyadic_equality",
    "baseline_bounds",
]


@dataclass(frozen=True)
class Weight:
    """A mean weight ``nu`` in [0, 1].

    ``value`` holds the exact rational of the input; every float is a dyadic
    rational, so nothing is lost. ``exact`` is True only when the caller gave
    a rational (``Fraction``, ``int`` or a ``"p/q"`` string). Only exact
    weights are ever classified as dyadic, so proximity to ``p/2**t`` never
    triggers an equality assertion.
    """

    value: Fraction
    exact: bool = False

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise DomainError(f"weight {self.value} is outside [0, 1]")

    @classmethod
    def of(cls, nu) -> Weight:
        if isinstance(nu, Weight):
            return nu
        if isinstance(nu, str):
            return parse_weight(nu)
        if isinstance(nu, (Fraction, int)):
            return cls(Fraction(nu), exact=True)
        x = float(nu)
        if not math.isfinite(x):
            raise DomainError(f"weight {nu!r} is not finite")
        return cls(Fraction(x), exact=False)

    @property
    def nu(self) -> float:
        return float(self.value)

    @property
    def dyadic(self) -> tuple[int, int] | None:
        """``(p, t)`` with ``nu = p / 2**t`` in lowest terms, or None."""
        if not self.exact:
            return None
        q = self.value.denominator
        if q & (q - 1):
            return None
        return self.value.numerator, q.bit_length() - 1

    @property
    def degenerate(self) -> bool:
        return self.value == 0 or self.value == 1

    def __str__(self):
        if self.exact:
            return str(self.value)
        return repr(self.nu)


def parse_weight(text: str) -> Weight:
    """Parse ``"p/q"`` (exact) or a decimal literal (inexact)."""
    s = text.strip()
    try:
        if "/" in s:
            p, q = s.split("/")
            return Weight(Fraction(int(p), int(q)), exact=True)
        return Weight.of(float(s))
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(f"cannot parse weight {text!r}") from None


@dataclass(frozen=True)
class RefinementSeq:
    """The sequences ``r_k``, ``R_k = 1 - r_k`` and ``m_k = floor(2^k nu)``
    for ``k = 0..depth``."""

    nu: Fraction
    depth: int
    r: tuple[float, ...]
    R: tuple[float, ...]
    m: tuple[int, ...]
    r_exact: tuple[Fraction, ...]


@dataclass(frozen=True)
class InequalityReport:
    """One evaluated inequality ``lhs <= rhs``.

    The check passes when ``rhs - lhs >= -tol * max(|lhs|, |rhs|)``.
    """

    name: str
    lhs: float
    rhs: float
    tol: float = DEFAULT_TOL
    degenerate: bool = False

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs))

    @property
    def rel_slack(self) -> float:
        s = self.scale
        return self.slack / s if s > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.rel_slack >= -self.tol


@dataclass(frozen=True)
class ChainResult:
    """A two-sided chain ``lower <= middle <= upper``.

    ``terms`` are the k-indexed refinement summands subtracted to form
    ``middle``; each is ``r_k`` times a square and hence nonnegative.
    """

    name: str
    lower: float
    middle: float
    upper: float
    terms: tuple[float, ...] = ()
    degenerate: bool = False

    def reports(self, tol: float = DEFAULT_TOL) -> tuple[InequalityReport, InequalityReport]:
        return (
            InequalityReport(self.name + "L", self.lower, self.middle, tol, self.degenerate),
            InequalityReport(self.name + "R", self.middle, self.upper, tol, self.degenerate),
        )

    def holds(self, tol: float = DEFAULT_TOL) -> bool:
        return all(rep.passed for rep in self.reports(tol))


@dataclass(frozen=True)
class EqualityReport:
    """Result of the dyadic equality check: all three chain values agree."""

    nu: Fraction
    n: int
    lower: float
    middle: float
    upper: float
    tol: float

    @property
    def spread(self) -> float:
        vals = (self.lower, self.middle, self.upper)
        return max(vals) - min(vals)

    @property
    def rel_spread(self) -> float:
        s = max(abs(self.lower), abs(self.middle), abs(self.upper))
        return self.spread / s if s > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.rel_spread <= self.tol


def kantorovich(t: float) -> float:
    """Kantorovich constant ``(1 + t)^2 / (4 t)``.

    Written as ``1 + (t - 1)^2 / (4 t)`` so that the excess over 1 keeps full
    relative accuracy near ``t = 1``.

    Raises
    ------
    DomainError
        If ``t`` is not a positive finite number.
    """
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"Kantorovich constant needs t > 0, got {t!r}")
    d = t - 1.0
    return 1.0 + d * (d / (4.0 * t))


def _clamp_depth(n: int) -> int:
    n = int(n)
    if n < 1:
        raise UsageError(f"refinement depth must be >= 1, got {n}")
    if n > DEPTH_CAP:
        warnings.warn(f"depth {n} clamped to {DEPTH_CAP}", RuntimeWarning, stacklevel=3)
        return DEPTH_CAP
    return n


@lru_cache(maxsize=8192)
def _seq(v: Fraction, depth: int) -> RefinementSeq:
    r = [min(v, 1 - v)]
    for _ in range(depth):
        r.append(min(2 * r[-1], 1 - 2 * r[-1]))
    m = tuple(math.floor(v * 2**k) for k in range(depth + 1))
    return RefinementSeq(
        nu=v,
        depth=depth,
        r=tuple(float(x) for x in r),
        R=tuple(float(1 - x) for x in r),
        m=m,
        r_exact=tuple(r),
    )


def refinement_seq(nu, depth: int) -> RefinementSeq:
    """Return ``r_k``, ``R_k`` and ``m_k`` for ``k = 0..depth``.

    The recursion runs in exact rational arithmetic, so for dyadic
    ``nu = p / 2**t`` one gets ``r_{t-1} = 1/2`` exactly.

    Examples
    --------
    >>> refinement_seq(0.3, 2).m
    (0, 0, 1)
    >>> refinement_seq("1/2", 2).r
    (0.5, 0.0, 0.0)
    """
    w = Weight.of(nu)
    return _seq(w.value, _clamp_depth(depth))


def _check_pair(a: float, b: float) -> None:
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"expected two positive finite reals, got ({a!r}, {b!r})")


def _gm(a: float, b: float, x: float) -> float:
    # a^(1-x) b^x; endpoints and a == b returned exactly
    if x == 0 or a == b:
        return a
    if x == 1:
        return b
    return a ** (1.0 - x) * b**x


def _am(a: float, b: float, x: float) -> float:
    return a if a == b else (1.0 - x) * a + x * b


def arith_mean(a: float, b: float, nu) -> float:
    """Weighted arithmetic mean ``(1 - nu) a + nu b``."""
    _check_pair(a, b)
    return _am(a, b, Weight.of(nu).nu)


def geo_mean(a: float, b: float, nu) -> float:
    """Weighted geometric mean ``a^(1 - nu) b^nu``."""
    _check_pair(a, b)
    return _gm(a, b, Weight.of(nu).nu)


def heinz_mean(a: float, b: float, nu) -> float:
    """Heinz mean ``(a #_nu b + a #_{1-nu} b) / 2``."""
    _check_pair(a, b)
    x = Weight.of(nu).nu
    return 0.5 * (_gm(a, b, x) + _gm(b, a, x))


def _terms(a, b, seq: RefinementSeq, n: int, *, start=0, swap=False, root=True) -> list[float]:
    """Summands ``r_k [G(m_k/2^k) - G((m_k+1)/2^k)]^2`` for ``start <= k < n``.

    ``G(x)`` is ``a^(1-x) b^x`` (or ``b^(1-x) a^x`` when swapped), taken under a
    square root when ``root`` is set.
    """
    if root:
        a, b = math.sqrt(a), math.sqrt(b)
    if swap:
        a, b = b, a
    out = []
    for k in range(start, n):
        mk = seq.m[k]
        d = _gm(a, b, math.ldexp(mk, -k)) - _gm(a, b, math.ldexp(mk + 1, -k))
        out.append(seq.r[k] * d * d)
    return out


def refinement_sum(a: float, b: float, seq: RefinementSeq, n: int) -> tuple[float, list[float]]:
    """Total and per-k summands of the square-root refinement sum.

    ``sum_{k<n} r_k [(a^(1-m_k/2^k) b^(m_k/2^k))^(1/2)
    - (a^(1-(m_k+1)/2^k) b^((m_k+1)/2^k))^(1/2)]^2``.
    """
    _check_pair(a, b)
    if not 1 <= n <= seq.depth:
        raise UsageError(f"n={n} exceeds the sequence depth {seq.depth}")
    terms = _terms(a, b, seq, n)
    return math.fsum(terms), terms


def refinement_sum_swapped(a: float, b: float, seq: RefinementSeq, n: int) -> float:
    """As :func:`refinement_sum` with the exponents of ``a`` and ``b`` exchanged."""
    _check_pair(a, b)
    if not 1 <= n <= seq.depth:
        raise UsageError(f"n={n} exceeds the sequence depth {seq.depth}")
    return math.fsum(_terms(a, b, seq, n, swap=True))


def _setup(a, b, nu, n):
    _check_pair(a, b)
    w = Weight.of(nu)
    n = _clamp_depth(n)
    seq = _seq(w.value, n)
    degenerate = w.degenerate or a == b
    return w.nu, n, seq, degenerate


def _middle(a: float, b: float, seq: RefinementSeq, n: int, square: bool = False) -> float:
    """``a∇b - S_n`` without cancellation.

    The refinement sum telescopes: with ``f = 2^n nu - m_n`` the middle of the
    chain equals ``(1 - f) a#_{m_n/2^n} b + f a#_{(m_n+1)/2^n} b``, a convex
    combination of two positive numbers. ``square`` evaluates the same
    expression on ``(a^2, b^2)``.
    """
    if a == b:
        return a * a if square else a
    mn = seq.m[n]
    f = float(seq.nu * 2**n - mn)
    p = _gm(a, b, math.ldexp(mn, -n))
    q = _gm(a, b, math.ldexp(mn + 1, -n)) if f else 0.0
    if square:
        p, q = p * p, q * q
    return (1.0 - f) * p + f * q


def chain_y1(a: float, b: float, nu, n: int) -> ChainResult:
    """The refined Young chain at depth ``n``.

    ``K(h^(1/2^n))^(r_n) a#b <= a∇b - S_n <= K(h^(1/2^n))^(R_n) a#b`` with
    ``h = b/a`` and ``S_n`` from :func:`refinement_sum`.

    Examples
    --------
    >>> res = chain_y1(1.0, 16.0, "1/4", 1)
    >>> res.lower, res.middle
    (2.5, 2.5)
    """
    x, n, seq, deg = _setup(a, b, nu, n)
    g = _gm(a, b, x)
    kk = kantorovich((b / a) ** (0.5**n))
    terms = _terms(a, b, seq, n)
    middle = _middle(a, b, seq, n)
    return ChainResult("y1", kk ** seq.r[n] * g, middle, kk ** seq.R[n] * g, tuple(terms), deg)


def reverse_y2(a: float, b: float, nu, n: int, tol: float = DEFAULT_TOL) -> InequalityReport:
    """Reverse Young bound ``a∇b <= K^(-r_n) a#b + (√a - √b)^2 - S'_n``.

    ``S'_n`` is the swapped-exponent sum of :func:`refinement_sum_swapped`.
    Since ``(√a - √b)^2 - S'_n = a∇b - 2√(ab) + (b∇a - S'_n)`` the right side
    is assembled from the stable middle of the swapped pair.
    """
    x, n, seq, deg = _setup(a, b, nu, n)
    g = _gm(a, b, x)
    kk = kantorovich((b / a) ** (0.5**n))
    am = _am(a, b, x)
    rhs = math.fsum([am, kk ** -seq.r[n] * g, _middle(b, a, seq, n), -2.0 * math.sqrt(a * b)])
    return InequalityReport("y2", am, rhs, tol, deg)


def chain_y3(a: float, b: float, nu, n: int) -> ChainResult:
    """Chain y1 on the squared pair ``(a^2, b^2)``; differences are not rooted."""
    x, n, seq, deg = _setup(a, b, nu, n)
    g2 = _gm(a, b, x) ** 2
    kk = kantorovich((b / a) ** (0.5 ** (n - 1)))
    terms = _terms(a, b, seq, n, root=False)
    middle = _middle(a, b, seq, n, square=True)
    return ChainResult("y3", kk ** seq.r[n] * g2, middle, kk ** seq.R[n] * g2, tuple(terms), deg)


def reverse_y4(a: float, b: float, nu, n: int, tol: float = DEFAULT_TOL) -> InequalityReport:
    """Reverse bound y2 on the squared pair."""
    x, n, seq, deg = _setup(a, b, nu, n)
    g2 = _gm(a, b, x) ** 2
    kk = kantorovich((b / a) ** (0.5 ** (n - 1)))
    lhs = _am(a * a, b * b, x)
    rhs = math.fsum([lhs, kk ** -seq.r[n] * g2, _middle(b, a, seq, n, square=True), -2.0 * a * b])
    return InequalityReport("y4", lhs, rhs, tol, deg)


def chain_y5(a: float, b: float, nu, n: int) -> ChainResult:
    """Squared-mean chain.

    ``K^(r_n) (a#b)^2 <= (a∇b)^2 - r_0^2 (a-b)^2 - sum_{k=1}^{n-1} ... <= K^(R_n) (a#b)^2``
    with ``K = K(h^(1/2^(n-1)))``. For ``n = 1`` the sum is empty. The middle
    coincides with that of :func:`chain_y3` because
    ``(a∇b)^2 - r_0^2 (a-b)^2 = a^2∇b^2 - r_0 (a-b)^2``.
    """
    x, n, seq, deg = _setup(a, b, nu, n)
    g2 = _gm(a, b, x) ** 2
    kk = kantorovich((b / a) ** (0.5 ** (n - 1)))
    terms = _terms(a, b, seq, n, start=1, root=False)
    middle = _middle(a, b, seq, n, square=True)
    return ChainResult("y5", kk ** seq.r[n] * g2, middle, kk ** seq.R[n] * g2, tuple(terms), deg)


def reverse_y6(a: float, b: float, nu, n: int, tol: float = DEFAULT_TOL, sum_form: str = "proof") -> InequalityReport:
    """Squared-mean reverse bound.

    ``(a∇b)^2 <= K^(-r_n) (a#b)^2 + R_0^2 (a-b)^2 - sum_{k=1}^{n-1} r_k [...]^2``.

    With ``sum_form="proof"`` (default) the bracket uses swapped exponents
    ``a^(m_k/2^k) b^(1-m_k/2^k) - a^((m_k+1)/2^k) b^(1-(m_k+1)/2^k)``, which is
    what the derivation through the squared reverse bound y4 produces; the
    right side then equals ``(a∇b)^2 + K^(-r_n)(a#b)^2 + M' - 2ab`` with
    ``M'`` the stable squared middle of the swapped pair.
    ``sum_form="display"`` uses the unswapped bracket of the squared chain y5
    literally; that variant is false in general and is kept for exploration.
    """
    if sum_form not in ("proof", "display"):
        raise UsageError(f"unknown sum_form {sum_form!r}")
    x, n, seq, deg = _setup(a, b, nu, n)
    g2 = _gm(a, b, x) ** 2
    kk = kantorovich((b / a) ** (0.5 ** (n - 1)))
    am = _am(a, b, x)
    if sum_form == "proof":
        rhs = math.fsum([am * am, kk ** -seq.r[n] * g2, _middle(b, a, seq, n, square=True), -2.0 * a * b])
    else:
        terms = _terms(a, b, seq, n, start=1, root=False)
        rhs = math.fsum([kk ** -seq.r[n] * g2, (seq.R[0] * (a - b)) ** 2] + [-t for t in terms])
    return InequalityReport("y6", am * am, rhs, tol, deg)


def _heinz_terms(a, b, seq, n):
    # H_{x0} - 2 H_{(x0+x1)/2} + H_{x1} is the average of the plain and the
    # swapped rooted squares, which keeps every summand visibly nonnegative.
    plain = _terms(a, b, seq, n)
    swapped = _terms(a, b, seq, n, swap=True)
    return [0.5 * (p + s) for p, s in zip(plain, swapped)]


def heinz_chain(a: float, b: float, nu, n: int) -> ChainResult:
    """Heinz-mean chain
    ``K^(r_n) H_nu <= (a+b)/2 - sum r_k [H_{x0} - 2H_{mid} + H_{x1}] <= K^(R_n) H_nu``."""
    x, n, seq, deg = _setup(a, b, nu, n)
    hm = 0.5 * (_gm(a, b, x) + _gm(b, a, x))
    kk = kantorovich((b / a) ** (0.5**n))
    terms = _heinz_terms(a, b, seq, n)
    middle = 0.5 * (_middle(a, b, seq, n) + _middle(b, a, seq, n))
    return ChainResult("heinz", kk ** seq.r[n] * hm, middle, kk ** seq.R[n] * hm, tuple(terms), deg)


def heinz_reverse(a: float, b: float, nu, n: int, tol: float = DEFAULT_TOL) -> InequalityReport:
    """Heinz reverse ``(a+b)/2 <= K^(-r_n) H_nu + (√a - √b)^2 - sum r_k [...]``."""
    x, n, seq, deg = _setup(a, b, nu, n)
    hm = 0.5 * (_gm(a, b, x) + _gm(b, a, x))
    kk = kantorovich((b / a) ** (0.5**n))
    lhs = 0.5 * (a + b)
    mids = 0.5 * (_middle(a, b, seq, n) + _middle(b, a, seq, n))
    rhs = math.fsum([lhs, kk ** -seq.r[n] * hm, mids, -2.0 * math.sqrt(a * b)])
    return InequalityReport("heinz_rev", lhs, rhs, tol, deg)


def dyadic_equality(a: float, b: float, numerator: int, t: int, tol: float = 1e-10) -> EqualityReport:
    """Evaluate chain y1 at ``nu = numerator / 2**t`` and depth ``t - 1``.

    At this depth all three members of the chain coincide. An even numerator
    is reduced first; the reduced exponent must still exceed 1.
    """
    p, t = int(numerator), int(t)
    if p <= 0 or p >= 2**t:
        raise UsageError(f"need 0 < numerator < 2**t, got {p}/2**{t}")
    while p % 2 == 0:
        p //= 2
        t -= 1
    if t < 2:
        raise UsageError(f"reduced weight {p}/2**{t} has t < 2; no equality depth")
    nu = Fraction(p, 2**t)
    res = chain_y1(a, b, nu, t - 1)
    return EqualityReport(nu, t - 1, res.lower, res.middle, res.upper, tol)


def baseline_bounds(a: float, b: float, nu, tol: float = DEFAULT_TOL) -> dict[str, InequalityReport]:
    """Prior-work Young refinements, each as an ``lhs <= rhs`` report.

    Keys
    ----
    km, km_rev
        ``a#b + r(√a-√b)^2 <= a∇b <= a#b + R(√a-√b)^2``.
    squared
        ``(a#b)^2 + r^2 (a-b)^2 <= (a∇b)^2``.
    kant_lower, kant_reverse, kant_upper
        ``K(√h)^r' a#b <= a∇b - r(√a-√b)^2``,
        ``a∇b - R(√a-√b)^2 <= K(√h)^(-r') a#b`` and
        ``a∇b - r(√a-√b)^2 <= K(√h)^R' a#b`` with
        ``r' = min(2r, 1-2r)``, ``R' = max(2r, 1-2r)``.
    liao_wu_lower, liao_wu_upper
        The two-term refinements with ``(ab)^(1/4)`` corrections, split at
        ``nu = 1/2``. The correction weight is ``r'`` and the Kantorovich
        exponent ``min(2r', 1-2r')``.

    Here ``r = min(nu, 1-nu)`` and ``R = max(nu, 1-nu)``; values are computed
    directly in floating point, independently of :func:`refinement_seq`.
    """
    _check_pair(a, b)
    w = Weight.of(nu)
    x = w.nu
    deg = w.degenerate or a == b
    r = min(x, 1.0 - x)
    big_r = max(x, 1.0 - x)
    rp = min(2 * r, 1 - 2 * r)
    big_rp = max(2 * r, 1 - 2 * r)
    r2 = min(2 * rp, 1 - 2 * rp)
    h = b / a
    am = _am(a, b, x)
    g = _gm(a, b, x)
    sa, sb = math.sqrt(a), math.sqrt(b)
    sq = (sa - sb) ** 2
    q = math.sqrt(sa * sb)
    k2 = kantorovich(math.sqrt(h))
    k4 = kantorovich(math.sqrt(math.sqrt(h)))

    out = {
        "km": InequalityReport("base_km", g + r * sq, am, tol, deg),
        "km_rev": InequalityReport("base_km_rev", am, g + big_r * sq, tol, deg),
        "squared": InequalityReport("base_squared", g * g + (r * (a - b)) ** 2, am * am, tol, deg),
        "kant_lower": InequalityReport("base_kant_lower", k2**rp * g, am - r * sq, tol, deg),
        "kant_reverse": InequalityReport("base_kant_reverse", am - big_r * sq, k2**-rp * g, tol, deg),
        "kant_upper": InequalityReport("base_kant_upper", am - r * sq, k2**big_rp * g, tol, deg),
    }
    if x <= 0.5:
        low = x * sq + rp * (q - sa) ** 2 + k4**r2 * g
        up = (1.0 - x) * sq - rp * (q - sb) ** 2 + k4**-r2 * g
    else:
        low = (1.0 - x) * sq + rp * (q - sb) ** 2 + k4**r2 * g
        up = x * sq - rp * (q - sa) ** 2 + k4**-r2 * g
    out["liao_wu_lower"] = InequalityReport("base_liao_wu_lower", low, am, tol, deg)
    out["liao_wu_upper"] = InequalityReport("base_liao_wu_upper", am, up, tol, deg)
    return out
