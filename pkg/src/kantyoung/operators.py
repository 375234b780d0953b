"""Loewner-order versions of the refined Young chains for matrix pairs whose
spectra are separated, ``M(A) <= m(B)``.

Every check assembles the final matrices and tests the difference for
positive semidefiniteness with :func:`kantyoung.dense.loewner_geq`. As a
diagnostic the corresponding scalar inequality is also evaluated on the
spectrum of the congruence ``X = A^(-1/2) B A^(-1/2)``; a failure that shows
up there is a property of the bound, one that does not is numerical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import scalar
from .dense import GeoPath, LoewnerReport, SpdMatrix, loewner_geq, spectrum_bounds
from .errors import HypothesisError, UsageError
from .scalar import DEFAULT_TOL, Weight, kantorovich, refinement_seq

UPPER_H_CHOICES = ("gap", "spread")
BRACKET_CHOICES = ("proof", "display")


class OrderedPair:
    """Positive definite ``A``, ``B`` with ``M(A) <= m(B)``.

    ``h = m(B) / M(A) >= 1`` is the smallest possible eigenvalue ratio and
    ``h_spread = M(B) / m(A)`` the largest; the spectrum of
    ``A^(-1/2) B A^(-1/2)`` lies in ``[h, h_spread]``.
    """

    def __init__(self, A, B):
        self.A = A if isinstance(A, SpdMatrix) else SpdMatrix(A)
        self.B = B if isinstance(B, SpdMatrix) else SpdMatrix(B)
        if self.A.dim != self.B.dim:
            raise UsageError(f"dimension mismatch: {self.A.dim} vs {self.B.dim}")
        sa, sb = spectrum_bounds(self.A), spectrum_bounds(self.B)
        if sa.hi > sb.lo:
            raise HypothesisError(
                f"spectral ordering violated: M(A) = {sa.hi:.17g} > m(B) = {sb.lo:.17g}"
            )
        self.spec_a, self.spec_b = sa, sb
        self.h = sb.lo / sa.hi
        self.h_spread = sb.hi / sa.lo
        self.path = GeoPath(self.A, self.B)

    @property
    def dim(self) -> int:
        return self.A.dim

    def geo(self, x: float) -> np.ndarray:
        return self.path.at(x)

    def arith(self, x: float) -> np.ndarray:
        return (1.0 - x) * self.A.array + x * self.B.array

    def heinz(self, x: float) -> np.ndarray:
        return 0.5 * (self.path.at(x) + self.path.at(1.0 - x))

    def congruence_spectrum(self) -> np.ndarray:
        return self.path.X.eigen.lam


@dataclass(frozen=True)
class OperatorChainReport:
    """Result of one operator check.

    For a two-sided chain ``lhs_matrix <= mid_matrix <= rhs_matrix``, ``left``
    tests the first and ``right`` the second inequality. A one-sided reverse
    bound ``lhs_matrix <= rhs_matrix`` only fills ``left`` and leaves
    ``mid_matrix`` and ``right`` empty.
    """

    name: str
    nu: float
    n: int
    h: float
    dim: int
    lhs_matrix: np.ndarray
    mid_matrix: np.ndarray | None
    rhs_matrix: np.ndarray
    left: LoewnerReport
    right: LoewnerReport | None = None
    spectral_left: float | None = None
    spectral_right: float | None = None

    @property
    def lambda_min_left(self) -> float:
        return self.left.lambda_min

    @property
    def lambda_min_right(self) -> float | None:
        return None if self.right is None else self.right.lambda_min

    @property
    def passed_left(self) -> bool:
        return self.left.passed

    @property
    def passed_right(self) -> bool:
        return True if self.right is None else self.right.passed

    @property
    def passed(self) -> bool:
        return self.passed_left and self.passed_right

    def to_record(self) -> dict:
        return {
            "check": self.name,
            "nu": self.nu,
            "n": self.n,
            "h": self.h,
            "dims": self.dim,
            "lambda_min_left": self.lambda_min_left,
            "lambda_min_right": self.lambda_min_right,
            "pass": self.passed,
        }


def _bracket(pair: OrderedPair, x0: float, x1: float, swap: bool = False) -> np.ndarray:
    if swap:
        x0, x1 = 1.0 - x0, 1.0 - x1
    return pair.geo(x0) - 2.0 * pair.geo(0.5 * (x0 + x1)) + pair.geo(x1)


def _exponents(seq, k):
    return np.ldexp(seq.m[k], -k), np.ldexp(seq.m[k] + 1, -k)


def op_refinement_sum(pair: OrderedPair, nu, n: int, swap: bool = False) -> np.ndarray:
    """``sum_{k<n} r_k [A#_{x0}B - 2 A#_{(x0+x1)/2}B + A#_{x1}B]`` with
    ``x0 = m_k/2^k`` and ``x1 = (m_k+1)/2^k``.

    ``swap`` replaces every exponent ``x`` by ``1 - x``.
    """
    seq = refinement_seq(nu, n)
    out = np.zeros((pair.dim, pair.dim))
    for k in range(seq.depth):
        if seq.r[k]:
            out += seq.r[k] * _bracket(pair, *_exponents(seq, k), swap=swap)
    return out


def _heinz_sum(pair: OrderedPair, seq) -> np.ndarray:
    out = np.zeros((pair.dim, pair.dim))
    for k in range(seq.depth):
        if seq.r[k]:
            x0, x1 = _exponents(seq, k)
            out += seq.r[k] * 0.5 * (_bracket(pair, x0, x1) + _bracket(pair, x0, x1, swap=True))
    return out


def _upper_h(pair: OrderedPair, upper_h: str) -> float:
    if upper_h not in UPPER_H_CHOICES:
        raise UsageError(f"upper_h must be one of {UPPER_H_CHOICES}, got {upper_h!r}")
    return pair.h if upper_h == "gap" else pair.h_spread


def _spectral_min(values) -> float:
    return float(min(values)) if len(values) else 0.0


def op_chain_check(pair: OrderedPair, nu, n: int, tol: float = DEFAULT_TOL, upper_h: str = "gap") -> OperatorChainReport:
    """Two-sided operator chain

    ``K(h^(1/2^n))^(r_n) A#B <= A∇B - sum_k r_k [...] <= K(h^(1/2^n))^(R_n) A#B``.

    ``upper_h="gap"`` uses ``h = m(B)/M(A)`` on both sides, as stated. This
    makes the right-hand inequality false whenever the congruence spectrum is
    not a single point, because the Kantorovich factor increases with the
    ratio. ``upper_h="spread"`` uses ``M(B)/m(A)`` on the right, which is the
    bound the scalar argument actually supports.
    """
    w = Weight.of(nu)
    x = w.nu
    seq = refinement_seq(w, n)
    n = seq.depth
    k_lo = kantorovich(pair.h ** (0.5**n))
    k_up = kantorovich(_upper_h(pair, upper_h) ** (0.5**n))
    g = pair.geo(x)
    mid = pair.arith(x) - op_refinement_sum(pair, w, n)
    lower = k_lo ** seq.r[n] * g
    upper = k_up ** seq.R[n] * g

    spec_l, spec_r = [], []
    for ev in pair.congruence_spectrum():
        c = scalar.chain_y1(1.0, float(ev), w, n)
        gx = scalar.geo_mean(1.0, float(ev), w)
        lo, up = k_lo ** seq.r[n] * gx, k_up ** seq.R[n] * gx
        spec_l.append((c.middle - lo) / max(c.middle, lo))
        spec_r.append((up - c.middle) / max(c.middle, up))

    return OperatorChainReport(
        "op_chain", x, n, pair.h, pair.dim, lower, mid, upper,
        loewner_geq(mid, lower, tol), loewner_geq(upper, mid, tol),
        _spectral_min(spec_l), _spectral_min(spec_r),
    )


def op_reverse_check(pair: OrderedPair, nu, n: int, tol: float = DEFAULT_TOL, brackets: str = "proof") -> OperatorChainReport:
    """Reverse operator bound

    ``A∇B <= K(h^(1/2^n))^(-r_n) A#B + (A - 2A#B + B) - sum_k r_k [...]``.

    The scalar reverse bound applied to ``X`` produces brackets with exponents
    ``1 - m_k/2^k`` etc.; ``brackets="proof"`` uses those. ``"display"`` uses
    the unswapped brackets of the forward chain, which fails for some weights
    above 1/2.
    """
    if brackets not in BRACKET_CHOICES:
        raise UsageError(f"brackets must be one of {BRACKET_CHOICES}, got {brackets!r}")
    w = Weight.of(nu)
    x = w.nu
    seq = refinement_seq(w, n)
    n = seq.depth
    kk = kantorovich(pair.h ** (0.5**n))
    lhs = pair.arith(x)
    gap = pair.A.array - 2.0 * pair.geo(0.5) + pair.B.array
    rhs = kk ** -seq.r[n] * pair.geo(x) + gap - op_refinement_sum(pair, w, n, swap=(brackets == "proof"))

    spec = []
    for ev in pair.congruence_spectrum():
        ev = float(ev)
        lhs_x = (1.0 - x) + x * ev
        terms = scalar._terms(1.0, ev, seq, n, swap=(brackets == "proof"))
        rhs_x = kk ** -seq.r[n] * ev**x + (1.0 - ev**0.5) ** 2 - sum(terms)
        spec.append((rhs_x - lhs_x) / max(abs(rhs_x), lhs_x))

    return OperatorChainReport(
        "op_rev", x, n, pair.h, pair.dim, lhs, None, rhs,
        loewner_geq(rhs, lhs, tol), None, _spectral_min(spec), None,
    )


def op_heinz_check(pair: OrderedPair, nu, n: int, tol: float = DEFAULT_TOL, upper_h: str = "gap") -> tuple[OperatorChainReport, OperatorChainReport]:
    """Heinz-mean operator chain and its reverse.

    Returns ``(chain, reverse)`` for

    ``K^(r_n) H_nu <= A∇B - sum r_k [H_{x0} - 2H_{mid} + H_{x1}] <= K^(R_n) H_nu``

    and ``A∇B <= K^(-r_n) H_nu + (A - 2A#B + B) - sum r_k [...]`` where ``A∇B``
    is the unweighted mean. ``upper_h`` is as in :func:`op_chain_check`.
    """
    w = Weight.of(nu)
    x = w.nu
    seq = refinement_seq(w, n)
    n = seq.depth
    k_lo = kantorovich(pair.h ** (0.5**n))
    k_up = kantorovich(_upper_h(pair, upper_h) ** (0.5**n))
    hm = pair.heinz(x)
    hsum = _heinz_sum(pair, seq)
    am = pair.arith(0.5)
    mid = am - hsum
    lower = k_lo ** seq.r[n] * hm
    upper = k_up ** seq.R[n] * hm
    chain = OperatorChainReport(
        "op_heinz", x, n, pair.h, pair.dim, lower, mid, upper,
        loewner_geq(mid, lower, tol), loewner_geq(upper, mid, tol),
    )
    gap = pair.A.array - 2.0 * pair.geo(0.5) + pair.B.array
    rhs = k_lo ** -seq.r[n] * hm + gap - hsum
    reverse = OperatorChainReport(
        "op_heinz_rev", x, n, pair.h, pair.dim, am, None, rhs, loewner_geq(rhs, am, tol),
    )
    return chain, reverse


def liao_wu_baseline_check(pair: OrderedPair, nu, tol: float = DEFAULT_TOL) -> OperatorChainReport:
    """Two-term operator refinement used as a comparison baseline.

    For ``nu <= 1/2``::

        A∇_nu B >= 2nu (A∇B - A#B) + r'(A#B - 2 A#_{1/4}B + A) + K(h^(1/4))^(r'') A#_nu B
        A∇_nu B <= 2(1-nu)(A∇B - A#B) - r'(A#B - 2 A#_{3/4}B + B) + K(h^(1/4))^(-r'') A#_nu B

    and the mirrored pair for ``nu > 1/2``, with ``r = min(nu, 1-nu)``,
    ``r' = min(2r, 1-2r)``, ``r'' = min(2r', 1-2r')`` and ``h = m(B)/M(A)``.
    The report's ``left`` tests the lower display, ``right`` the upper one.
    """
    x = Weight.of(nu).nu
    r = min(x, 1.0 - x)
    rp = min(2 * r, 1 - 2 * r)
    r2 = min(2 * rp, 1 - 2 * rp)
    kk = kantorovich(pair.h**0.25)
    A, B = pair.A.array, pair.B.array
    an = pair.arith(x)
    g, g2 = pair.geo(x), pair.geo(0.5)
    core = pair.arith(0.5) - g2
    low_a = g2 - 2.0 * pair.geo(0.25) + A
    low_b = g2 - 2.0 * pair.geo(0.75) + B
    if x <= 0.5:
        lower = 2 * x * core + rp * low_a + kk**r2 * g
        upper = 2 * (1 - x) * core - rp * low_b + kk**-r2 * g
    else:
        lower = 2 * (1 - x) * core + rp * low_b + kk**r2 * g
        upper = 2 * x * core - rp * low_a + kk**-r2 * g
    return OperatorChainReport(
        "op_liao_wu", x, 2, pair.h, pair.dim, lower, an, upper,
        loewner_geq(an, lower, tol), loewner_geq(upper, an, tol),
    )


def scaled(pair: OrderedPair, c: float) -> OrderedPair:
    """The pair ``(cA, cB)``."""
    return OrderedPair(SpdMatrix(c * pair.A.array, check=False), SpdMatrix(c * pair.B.array, check=False))


__all__ = [
    "OrderedPair",
    "OperatorChainReport",
    "op_refinement_sum",
    "op_chain_check",
    "op_reverse_check",
    "op_heinz_check",
    "liao_wu_baseline_check",
    "scaled",
]
