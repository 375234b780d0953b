"""Hilbert-Schmidt norm versions of the squared-mean Young chains.

For positive definite ``A = U diag(lam) U^T`` and ``B = V diag(mu) V^T`` and an
arbitrary square ``X``, every quantity below is a weighted sum of
``|y_ij|^2`` with ``Y = U^T X V``. The Kantorovich factors are therefore
taken as the extreme values over the grid of eigenvalue ratios ``mu_j / lam_i``.

Norms are evaluated directly from the matrix products, which tests the
statements themselves; :meth:`HsInstance.entrywise` gives the ``Y``-based
form for cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import SpdMatrix, hs_norm, matrix_power
from .errors import UsageError
from .scalar import DEFAULT_TOL, InequalityReport, Weight, kantorovich, refinement_seq

SIGN_CHOICES = ("plus", "minus")
SUM_FORMS = ("proof", "display")
INVARIANCE_TOL = 1e-12


class HsInstance:
    """Triple ``(A, B, X)`` with both eigendecompositions and ``Y = U^T X V``."""

    def __init__(self, A, B, X):
        self.A = A if isinstance(A, SpdMatrix) else SpdMatrix(A)
        self.B = B if isinstance(B, SpdMatrix) else SpdMatrix(B)
        X = np.array(X, dtype=float)
        if X.shape != (self.A.dim, self.A.dim) or self.B.dim != self.A.dim:
            raise UsageError(
                f"shape mismatch: A {self.A.dim}x{self.A.dim}, B {self.B.dim}x{self.B.dim}, X {X.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise UsageError("X has non-finite entries")
        X.setflags(write=False)
        self.X = X
        ea, eb = self.A.eigen, self.B.eigen
        self.U, self.lam = ea.Q, ea.lam
        self.V, self.mu = eb.Q, eb.lam
        self.Y = self.U.T @ X @ self.V
        self._powers: dict[tuple[str, float], np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.A.dim

    def invariance_residual(self) -> float:
        """``| ||Y||_2 - ||X||_2 |`` relative to ``||X||_2``."""
        nx = hs_norm(self.X)
        return abs(hs_norm(self.Y) - nx) / nx if nx > 0 else hs_norm(self.Y)

    def ratios(self) -> np.ndarray:
        """Grid ``mu_j / lam_i`` indexed ``[i, j]``."""
        return self.mu[None, :] / self.lam[:, None]

    def _pow(self, which: str, p: float) -> np.ndarray:
        key = (which, float(p))
        if key not in self._powers:
            self._powers[key] = matrix_power(self.A if which == "A" else self.B, p).array
        return self._powers[key]

    def sandwich(self, p: float) -> np.ndarray:
        """``A^(1-p) X B^p``."""
        return self._pow("A", 1.0 - p) @ self.X @ self._pow("B", p)

    def entrywise(self, f) -> float:
        """``sum_ij f(lam_i, mu_j) |y_ij|^2`` for a vectorized ``f``."""
        w = f(self.lam[:, None], self.mu[None, :])
        return float(np.sum(w * self.Y**2))


@dataclass(frozen=True)
class KtFactors:
    """Grid extremes ``under = min K(.)^(r_t)`` and ``over = max K(.)^(R_t)``."""

    t: int
    under: float
    over: float


def _grid_factors(inst: HsInstance, w: Weight, t: int):
    seq = refinement_seq(w, t)
    t = seq.depth
    kk = np.vectorize(kantorovich)(inst.ratios() ** (0.5 ** (t - 1)))
    return seq, t, kk ** seq.r[t], kk ** seq.R[t]


def kt_factors(inst: HsInstance, nu, t: int) -> KtFactors:
    """Extreme Kantorovich factors over all ``dim**2`` eigenvalue ratios.

    ``under = min_ij K((mu_j/lam_i)^(1/2^(t-1)))^(r_t)`` and ``over`` is the
    maximum of the same expression with exponent ``R_t``.
    """
    _, t, lo, hi = _grid_factors(inst, Weight.of(nu), t)
    return KtFactors(t, float(lo.min()), float(hi.max()))


@dataclass(frozen=True)
class HsReport:
    """Outcome of a Hilbert-Schmidt check.

    Chains fill ``lower``, ``middle``, ``upper`` and both reports; the reverse
    bound stores its two sides in ``middle`` (lhs) and ``upper`` (rhs) and
    leaves ``lower`` and ``right`` empty.
    """

    name: str
    nu: float
    t: int
    dim: int
    lower: float | None
    middle: float
    upper: float
    left: InequalityReport
    right: InequalityReport | None
    sign_variant: str
    factors: KtFactors = field(repr=False, default=None)

    @property
    def slacks(self) -> list[float]:
        return [rep.rel_slack for rep in (self.left, self.right) if rep is not None]

    @property
    def passed(self) -> bool:
        return all(rep.passed for rep in (self.left, self.right) if rep is not None)

    def to_record(self) -> dict:
        return {
            "check": self.name,
            "nu": self.nu,
            "t": self.t,
            "dims": self.dim,
            "lower": self.lower,
            "middle": self.middle,
            "upper": self.upper,
            "slacks": self.slacks,
            "sign_variant": self.sign_variant,
            "pass": self.passed,
        }


def _combined(inst: HsInstance, x: float, sign: str) -> float:
    if sign not in SIGN_CHOICES:
        raise UsageError(f"sign must be one of {SIGN_CHOICES}, got {sign!r}")
    A, B, X = inst.A.array, inst.B.array, inst.X
    s = 1.0 if sign == "plus" else -1.0
    return hs_norm((1.0 - x) * (A @ X) + s * x * (X @ B)) ** 2


def _commutator_sq(inst: HsInstance) -> float:
    return hs_norm(inst.A.array @ inst.X - inst.X @ inst.B.array) ** 2


def _tail_sum(inst: HsInstance, seq, t: int, swap: bool) -> float:
    total = 0.0
    for k in range(1, t):
        if not seq.r[k]:
            continue
        x0, x1 = np.ldexp(seq.m[k], -k), np.ldexp(seq.m[k] + 1, -k)
        if swap:
            x0, x1 = 1.0 - x0, 1.0 - x1
        total += seq.r[k] * hs_norm(inst.sandwich(x0) - inst.sandwich(x1)) ** 2
    return total


def hs_chain_check(inst: HsInstance, nu, t: int, tol: float = DEFAULT_TOL, sign: str = "plus") -> HsReport:
    """Two-sided chain

    ``under ||A^(1-nu) X B^nu||^2 <= ||(1-nu)AX + nu XB||^2 - r_0^2 ||AX - XB||^2
    - sum_{k=1}^{t-1} r_k ||A^(1-x0) X B^x0 - A^(1-x1) X B^x1||^2 <= over ||...||^2``

    with ``x0 = m_k/2^k`` and ``x1 = (m_k+1)/2^k``. ``sign="minus"`` replaces
    the plus in the combined term by a minus; that variant is false in
    general and exists only to exhibit counterexamples.
    """
    w = Weight.of(nu)
    x = w.nu
    seq, t, lo, hi = _grid_factors(inst, w, t)
    kt = KtFactors(t, float(lo.min()), float(hi.max()))
    g = hs_norm(inst.sandwich(x)) ** 2
    mid = _combined(inst, x, sign) - seq.r[0] ** 2 * _commutator_sq(inst) - _tail_sum(inst, seq, t, swap=False)
    lower, upper = kt.under * g, kt.over * g
    deg = w.degenerate
    return HsReport(
        "hs_chain", x, t, inst.dim, lower, mid, upper,
        InequalityReport("hs_chainL", lower, mid, tol, deg),
        InequalityReport("hs_chainR", mid, upper, tol, deg),
        sign, kt,
    )


def hs_reverse_check(
    inst: HsInstance, nu, t: int, tol: float = DEFAULT_TOL, sign: str = "plus", sum_form: str = "proof"
) -> HsReport:
    """Reverse bound

    ``||(1-nu)AX + nu XB||^2 <= under^(-1) ||A^(1-nu) X B^nu||^2 + R_0^2 ||AX - XB||^2 - sum_{k=1}^{t-1} r_k ||...||^2``.

    Applying the scalar reverse squared-mean bound entrywise produces summands
    ``||A^x0 X B^(1-x0) - A^x1 X B^(1-x1)||^2``; ``sum_form="proof"`` uses
    those. ``"display"`` uses the forward-chain summands instead, which can
    fail.
    """
    if sum_form not in SUM_FORMS:
        raise UsageError(f"sum_form must be one of {SUM_FORMS}, got {sum_form!r}")
    w = Weight.of(nu)
    x = w.nu
    seq, t, lo, hi = _grid_factors(inst, w, t)
    kt = KtFactors(t, float(lo.min()), float(hi.max()))
    g = hs_norm(inst.sandwich(x)) ** 2
    lhs = _combined(inst, x, sign)
    rhs = g / kt.under + seq.R[0] ** 2 * _commutator_sq(inst) - _tail_sum(inst, seq, t, swap=(sum_form == "proof"))
    return HsReport(
        "hs_rev", x, t, inst.dim, None, lhs, rhs,
        InequalityReport("hs_rev", lhs, rhs, tol, w.degenerate), None,
        sign, kt,
    )


__all__ = [
    "HsInstance",
    "KtFactors",
    "HsReport",
    "kt_factors",
    "hs_chain_check",
    "hs_reverse_check",
    "SIGN_CHOICES",
    "SUM_FORMS",
]
