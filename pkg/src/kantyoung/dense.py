"""Dense real symmetric matrices: Jacobi eigensolver, functional calculus,
operator means, Loewner-order tests and the Hilbert-Schmidt norm.

Only real symmetric matrices are handled. Everything is small and dense
(dimensions up to a few dozen), so clarity beats BLAS-level tuning.
"""
from __future__ import annotations

import io
import math
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericError, UsageError
from .scalar import Weight

SYM_TOL = 1e-13
JACOBI_MAX_SWEEPS = 30
JACOBI_OFF_TOL = 1e-14
SPD_RATIO_FLOOR = 1e-13


@dataclass(frozen=True)
class EigenDecomp:
    """``S = Q diag(lam) Q^T`` with ``lam`` ascending and ``Q`` orthogonal."""

    Q: np.ndarray
    lam: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        return (self.Q * self.lam) @ self.Q.T


@dataclass(frozen=True)
class SpectrumBounds:
    lo: float
    hi: float


@dataclass(frozen=True)
class LoewnerReport:
    """Outcome of testing ``P >= Q`` in the Loewner order."""

    lambda_min: float
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.lambda_min >= -self.tol * self.scale

    @property
    def rel_slack(self) -> float:
        return self.lambda_min / self.scale if self.scale > 0 else 0.0


def maxabs(M) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def as_sym(M, tol: float = SYM_TOL) -> np.ndarray:
    """Validate symmetry and return a read-only symmetrized copy."""
    a = np.array(M, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise UsageError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    if maxabs(a - a.T) > tol * maxabs(a):
        raise DomainError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    return a


def eigen_sym(S, max_sweeps: int = JACOBI_MAX_SWEEPS, off_tol: float = JACOBI_OFF_TOL) -> EigenDecomp:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps visit every ``(p, q)`` pair with ``p < q`` in row order and stop
    once the off-diagonal Frobenius norm drops to ``off_tol * maxabs(S)``.

    Returns
    -------
    EigenDecomp
        Eigenvalues ascending, eigenvectors as the columns of ``Q``.

    Raises
    ------
    NumericError
        If ``max_sweeps`` sweeps do not reach the threshold; ``residual``
        carries the remaining off-diagonal norm.
    """
    a = np.array(as_sym(S))
    n = a.shape[0]
    v = np.eye(n)
    scale = maxabs(a)
    sweeps = 0
    if n > 1 and scale > 0:
        thresh = off_tol * scale
        while True:
            od = a[~np.eye(n, dtype=bool)]
            off = math.sqrt(float(np.dot(od, od)))
            if off <= thresh:
                break
            if sweeps == max_sweeps:
                raise NumericError(f"Jacobi did not converge in {max_sweeps} sweeps", residual=off)
            sweeps += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    diff = a[q, q] - a[p, p]
                    if abs(diff) > 1e150 * abs(apq):
                        t = apq / diff
                    else:
                        theta = diff / (2.0 * apq)
                        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    cp, cq = a[:, p].copy(), a[:, q].copy()
                    a[:, p] = c * cp - s * cq
                    a[:, q] = s * cp + c * cq
                    rp, rq = a[p, :].copy(), a[q, :].copy()
                    a[p, :] = c * rp - s * rq
                    a[q, :] = s * rp + c * rq
                    a[p, q] = a[q, p] = 0.0
                    vp, vq = v[:, p].copy(), v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
    lam = np.diag(a).copy()
    order = np.argsort(lam, kind="stable")
    lam, Q = lam[order], v[:, order]
    lam.setflags(write=False)
    Q.setflags(write=False)
    return EigenDecomp(Q, lam, sweeps)


class SpdMatrix:
    """Immutable symmetric positive definite matrix with a cached eigendecomposition.

    The decomposition is computed at most once, under a lock, on first use.
    ``check=False`` skips the positivity test for matrices that are positive
    definite by construction.
    """

    __slots__ = ("_a", "_eig", "_lock")

    def __init__(self, data, check: bool = True):
        self._a = as_sym(data)
        self._eig = None
        self._lock = threading.Lock()
        if check:
            lam = self.eigen.lam
            if not lam[0] > SPD_RATIO_FLOOR * max(lam[-1], 0.0) or lam[-1] <= 0:
                raise DomainError(
                    f"matrix is not positive definite (eigenvalues {lam[0]:.3g} .. {lam[-1]:.3g})"
                )

    @classmethod
    def from_eigen(cls, Q: np.ndarray, lam: np.ndarray) -> SpdMatrix:
        """Build ``Q diag(lam) Q^T`` and seed the cache with this decomposition."""
        order = np.argsort(lam, kind="stable")
        lam = np.array(lam, dtype=float)[order]
        Q = np.array(Q, dtype=float)[:, order]
        out = cls((Q * lam) @ Q.T, check=False)
        lam.setflags(write=False)
        Q.setflags(write=False)
        out._eig = EigenDecomp(Q, lam)
        return out

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def eigen(self) -> EigenDecomp:
        if self._eig is None:
            with self._lock:
                if self._eig is None:
                    self._eig = eigen_sym(self._a)
        return self._eig

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim})"


def _arr(M) -> np.ndarray:
    return M.array if isinstance(M, SpdMatrix) else np.asarray(M, dtype=float)


def _spd(M) -> SpdMatrix:
    return M if isinstance(M, SpdMatrix) else SpdMatrix(M)


def _same_dim(A, B):
    if _arr(A).shape != _arr(B).shape:
        raise UsageError(f"dimension mismatch: {_arr(A).shape} vs {_arr(B).shape}")


def spectral_apply(P, f) -> np.ndarray:
    """``Q diag(f(lam)) Q^T`` for a scalar function ``f`` applied to the spectrum.

    ``f`` receives the eigenvalue array. Non-finite outputs raise
    :class:`DomainError`.
    """
    P = _spd(P)
    e = P.eigen
    with np.errstate(all="ignore"):
        vals = np.asarray(f(e.lam), dtype=float) * np.ones_like(e.lam)
    if not np.all(np.isfinite(vals)):
        raise DomainError("function is undefined at some eigenvalue")
    out = (e.Q * vals) @ e.Q.T
    return 0.5 * (out + out.T)


def matrix_power(P, t: float) -> SpdMatrix:
    """Real power ``P^t`` through the cached eigendecomposition of ``P``."""
    P = _spd(P)
    if t == 1:
        return P
    e = P.eigen
    return SpdMatrix.from_eigen(e.Q, e.lam ** float(t))


class GeoPath:
    """Weighted geometric means ``A #_x B`` for many ``x`` sharing one congruence.

    ``A #_x B = A^(1/2) (A^(-1/2) B A^(-1/2))^x A^(1/2)``; the inner matrix and
    its decomposition are computed once.
    """

    def __init__(self, A, B):
        _same_dim(A, B)
        self.A, self.B = _spd(A), _spd(B)
        self.A_half = matrix_power(self.A, 0.5).array
        a_ihalf = matrix_power(self.A, -0.5).array
        self.X = SpdMatrix(a_ihalf @ self.B.array @ a_ihalf, check=False)

    def at(self, x: float) -> np.ndarray:
        if x == 0:
            return self.A.array
        if x == 1:
            return self.B.array
        e = self.X.eigen
        inner = (e.Q * e.lam ** float(x)) @ e.Q.T
        out = self.A_half @ inner @ self.A_half
        return 0.5 * (out + out.T)


def weighted_geo(A, B, nu) -> SpdMatrix:
    """``A #_nu B = A^(1/2) (A^(-1/2) B A^(-1/2))^nu A^(1/2)``."""
    x = Weight.of(nu).nu
    return SpdMatrix(GeoPath(A, B).at(x), check=False)


def weighted_arith(A, B, nu) -> SpdMatrix:
    """``(1 - nu) A + nu B``."""
    _same_dim(A, B)
    x = Weight.of(nu).nu
    return SpdMatrix((1.0 - x) * _arr(A) + x * _arr(B), check=False)


def heinz_op(A, B, nu) -> np.ndarray:
    """Heinz mean ``(A #_nu B + A #_{1-nu} B) / 2``."""
    x = Weight.of(nu).nu
    path = GeoPath(A, B)
    return 0.5 * (path.at(x) + path.at(1.0 - x))


def loewner_geq(P, Q, tol: float = 1e-9) -> LoewnerReport:
    """Test ``P >= Q``: passes when ``lambda_min(P - Q) >= -tol * max(maxabs(P), maxabs(Q))``."""
    _same_dim(P, Q)
    p, q = _arr(P), _arr(Q)
    d = p - q
    lam = eigen_sym(0.5 * (d + d.T)).lam
    return LoewnerReport(float(lam[0]), max(maxabs(p), maxabs(q)), tol)


def spectrum_bounds(P) -> SpectrumBounds:
    """Smallest and largest eigenvalue."""
    lam = P.eigen.lam if isinstance(P, SpdMatrix) else eigen_sym(P).lam
    return SpectrumBounds(float(lam[0]), float(lam[-1]))


def hs_norm(M) -> float:
    """Hilbert-Schmidt (Frobenius) norm: square root of the sum of squared entries."""
    m = _arr(M)
    return math.sqrt(float(np.sum(m * m)))


def format_matrix(M) -> str:
    """Text form: a ``dim`` line, then ``dim`` rows at 17 significant digits."""
    m = _arr(M)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {m.shape}")
    lines = [str(m.shape[0])]
    lines += [" ".join(f"{x:.17g}" for x in row) for row in m]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [ln.split() for ln in io.StringIO(text) if ln.strip()]
    try:
        dim = int(rows[0][0])
        if len(rows[0]) != 1 or dim < 1:
            raise ValueError
        body = np.array([[float(x) for x in row] for row in rows[1:]], dtype=float)
    except (ValueError, IndexError):
        raise UsageError("malformed matrix text") from None
    if body.shape != (dim, dim):
        raise UsageError(f"expected {dim} rows of {dim} values, got shape {body.shape}")
    return body


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, M) -> None:
    Path(path).write_text(format_matrix(M))
