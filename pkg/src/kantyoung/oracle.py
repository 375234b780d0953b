"""Extended-precision reference values for the scalar chains.

Everything here is recomputed from scratch with :mod:`mpmath`; nothing is
shared with :mod:`kantyoung.scalar` beyond the calling convention, so the two
routes can be compared against each other.
"""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .scalar import Weight

ORACLE_DPS = 60

FAMILIES = ("y1", "y2", "y3", "y4", "y5", "y6", "heinz", "heinz_rev")


def _rational(v: Fraction):
    return mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator)


def _kant(t):
    return (1 + t) ** 2 / (4 * t)


def highprec_chain_oracle(a: float, b: float, nu, n: int, dps: int = ORACLE_DPS) -> dict[str, tuple]:
    """Evaluate every scalar chain at ``dps`` significant digits.

    Inputs are taken as exact binary values (``a``, ``b`` floats convert
    exactly; ``nu`` keeps its exact rational). Returns a mapping from family
    name to ``(lower, middle, upper)`` for chains and ``(lhs, rhs)`` for the
    reverse bounds, all as ``mpmath.mpf``.

    Raises
    ------
    RuntimeError
        If the working precision cannot be established; the oracle never
        falls back to lower precision.
    """
    if dps < 50:
        raise RuntimeError(f"oracle precision {dps} digits is below the 50-digit floor")
    v = Weight.of(nu).value
    n = int(n)
    with mpmath.workdps(dps):
        if mpmath.mp.dps < dps:
            raise RuntimeError("mpmath refused the requested precision")
        A, B, x = mpmath.mpf(a), mpmath.mpf(b), _rational(v)
        one = mpmath.mpf(1)

        r = [min(v, 1 - v)]
        for _ in range(n):
            r.append(min(2 * r[-1], 1 - 2 * r[-1]))
        m = [math.floor(v * 2**k) for k in range(n + 1)]
        rk = [_rational(t) for t in r]
        Rk = [one - t for t in rk]

        def pw(p, q, e):  # p^(1-e) q^e
            return mpmath.power(p, one - e) * mpmath.power(q, e)

        def bracket(k):
            return _rational(Fraction(m[k], 2**k)), _rational(Fraction(m[k] + 1, 2**k))

        def rooted_sum(p, q, start=0):
            s = mpmath.mpf(0)
            for k in range(start, n):
                e0, e1 = bracket(k)
                s += rk[k] * (mpmath.sqrt(pw(p, q, e0)) - mpmath.sqrt(pw(p, q, e1))) ** 2
            return s

        def plain_sum(p, q, start=0):
            s = mpmath.mpf(0)
            for k in range(start, n):
                e0, e1 = bracket(k)
                s += rk[k] * (pw(p, q, e0) - pw(p, q, e1)) ** 2
            return s

        def heinz(e):
            return (pw(A, B, e) + pw(A, B, one - e)) / 2

        h = B / A
        am = (one - x) * A + x * B
        g = pw(A, B, x)
        k1 = _kant(mpmath.power(h, mpmath.mpf(2) ** -n))
        k2 = _kant(mpmath.power(h, mpmath.mpf(2) ** -(n - 1)))
        sq = (mpmath.sqrt(A) - mpmath.sqrt(B)) ** 2
        d2 = (A - B) ** 2

        out = {}
        out["y1"] = (k1 ** rk[n] * g, am - rooted_sum(A, B), k1 ** Rk[n] * g)
        out["y2"] = (am, k1 ** -rk[n] * g + sq - rooted_sum(B, A))
        mid3 = (one - x) * A**2 + x * B**2 - plain_sum(A, B)
        out["y3"] = (k2 ** rk[n] * g**2, mid3, k2 ** Rk[n] * g**2)
        out["y4"] = ((one - x) * A**2 + x * B**2, k2 ** -rk[n] * g**2 + d2 - plain_sum(B, A))
        mid5 = am**2 - rk[0] ** 2 * d2 - plain_sum(A, B, start=1)
        out["y5"] = (k2 ** rk[n] * g**2, mid5, k2 ** Rk[n] * g**2)
        out["y6"] = (am**2, k2 ** -rk[n] * g**2 + Rk[0] ** 2 * d2 - plain_sum(B, A, start=1))

        hsum = mpmath.mpf(0)
        for k in range(n):
            e0, e1 = bracket(k)
            hsum += rk[k] * (heinz(e0) - 2 * heinz((e0 + e1) / 2) + heinz(e1))
        hv = heinz(x)
        out["heinz"] = (k1 ** rk[n] * hv, (A + B) / 2 - hsum, k1 ** Rk[n] * hv)
        out["heinz_rev"] = ((A + B) / 2, k1 ** -rk[n] * hv + sq - hsum)
    return out
