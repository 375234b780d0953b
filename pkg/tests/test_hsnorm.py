import itertools

import numpy as np
import pytest

from kantyoung import scalar
from kantyoung.dense import SpdMatrix, hs_norm
from kantyoung.errors import UsageError
from kantyoung.harness import gen_spd, random_orthogonal
from kantyoung.hsnorm import HsInstance, hs_chain_check, hs_reverse_check, kt_factors

NUS = (0.1, 0.3, 0.5, 0.7, 0.9)


def random_instance(seed, dim, lo=0.1, hi=10.0):
    A = gen_spd([seed, 0], dim, lo, hi)
    B = gen_spd([seed, 1], dim, lo, hi)
    X = np.random.default_rng([seed, 2]).uniform(-1.0, 1.0, (dim, dim))
    return HsInstance(A, B, X)


# ---------------------------------------------------------------- instance


def test_shape_mismatch():
    with pytest.raises(UsageError):
        HsInstance(np.eye(2), np.eye(2), np.ones((2, 3)))
    with pytest.raises(UsageError):
        HsInstance(np.eye(2), np.eye(3), np.ones((2, 2)))


def test_non_finite_x():
    with pytest.raises(UsageError):
        HsInstance(np.eye(2), np.eye(2), [[1.0, np.nan], [0.0, 1.0]])


@pytest.mark.parametrize("seed", range(10))
def test_rotation_preserves_norm(seed):
    inst = random_instance(seed, 1 + seed % 6)
    assert inst.invariance_residual() <= 1e-12


def test_sandwich_endpoints():
    inst = random_instance(3, 4)
    A, B, X = inst.A.array, inst.B.array, inst.X
    assert np.allclose(inst.sandwich(0.0), A @ X, rtol=0, atol=1e-12)
    assert np.allclose(inst.sandwich(1.0), X @ B, rtol=0, atol=1e-12)


def test_entrywise_form_matches_direct_norm():
    inst = random_instance(5, 5)
    x = 0.3
    direct = hs_norm(inst.sandwich(x)) ** 2
    via_y = inst.entrywise(lambda l, m: l ** (2 * (1 - x)) * m ** (2 * x))
    assert via_y == pytest.approx(direct, rel=1e-12)


# ---------------------------------------------------------------- factors


def test_identity_factors_are_one():
    inst = HsInstance(np.eye(3), np.eye(3), np.ones((3, 3)))
    kt = kt_factors(inst, 0.3, 3)
    assert kt.under == 1.0 and kt.over == 1.0


def test_single_ratio_factor():
    inst = HsInstance([[1.0]], [[4.0]], [[1.0]])
    kt = kt_factors(inst, 0.3, 1)
    # r_1 = 0.4 and R_1 = 0.6 for nu = 0.3
    assert kt.under == pytest.approx(scalar.kantorovich(4.0) ** 0.4, rel=1e-15)
    assert kt.over == pytest.approx(scalar.kantorovich(4.0) ** 0.6, rel=1e-15)


@pytest.mark.parametrize("seed, nu, t", [(0, 0.3, 1), (1, 0.7, 2), (2, 0.45, 4)])
def test_factors_match_exhaustive_grid(seed, nu, t):
    inst = random_instance(seed, 4)
    seq = scalar.refinement_seq(nu, t)
    vals_lo, vals_hi = [], []
    for l, m in itertools.product(inst.lam, inst.mu):
        k = scalar.kantorovich((m / l) ** (0.5 ** (t - 1)))
        vals_lo.append(k ** seq.r[t])
        vals_hi.append(k ** seq.R[t])
    kt = kt_factors(inst, nu, t)
    assert kt.under == pytest.approx(min(vals_lo), rel=1e-14)
    assert kt.over == pytest.approx(max(vals_hi), rel=1e-14)


# ---------------------------------------------------------------- chain


@pytest.mark.parametrize("a, b, nu, t", [(1.0, 4.0, 0.3, 1), (2.0, 0.5, 0.7, 3), (1.0, 9.0, 0.45, 2)])
def test_one_by_one_reduces_to_squared_scalar_chain(a, b, nu, t):
    inst = HsInstance([[a]], [[b]], [[1.0]])
    rep = hs_chain_check(inst, nu, t)
    c = scalar.chain_y5(a, b, nu, t)
    assert rep.lower == pytest.approx(c.lower, rel=1e-13)
    assert rep.middle == pytest.approx(c.middle, rel=1e-12)
    assert rep.upper == pytest.approx(c.upper, rel=1e-13)
    rev = hs_reverse_check(inst, nu, t)
    s = scalar.reverse_y6(a, b, nu, t)
    assert rev.middle == pytest.approx(s.lhs, rel=1e-13)
    assert rev.upper == pytest.approx(s.rhs, rel=1e-12)


def test_diagonal_with_identity_x_is_entrywise_sum():
    lam, mu = [1.0, 2.0, 3.0], [5.0, 1.5, 0.5]
    inst = HsInstance(np.diag(lam), np.diag(mu), np.eye(3))
    rep = hs_chain_check(inst, 0.3, 2)
    mids = [scalar.chain_y5(l, m, 0.3, 2).middle for l, m in zip(lam, mu)]
    assert rep.middle == pytest.approx(sum(mids), rel=1e-12)
    g = sum(scalar.geo_mean(l, m, 0.3) ** 2 for l, m in zip(lam, mu))
    assert rep.lower == pytest.approx(rep.factors.under * g, rel=1e-14)
    assert rep.passed


@pytest.mark.parametrize("seed", range(30))
def test_chain_and_reverse_hold_on_random_triples(seed):
    inst = random_instance(100 + seed, 1 + seed % 7)
    nu, t = NUS[seed % 5], 1 + seed % 4
    assert hs_chain_check(inst, nu, t).passed
    assert hs_reverse_check(inst, nu, t).passed


@pytest.mark.parametrize("seed", range(5))
def test_unitary_invariance(seed):
    dim = 4
    inst = random_instance(200 + seed, dim)
    rng = np.random.default_rng([seed, 7])
    Q, R = random_orthogonal(rng, dim), random_orthogonal(rng, dim)
    rot = HsInstance(Q.T @ inst.A.array @ Q, R.T @ inst.B.array @ R, Q.T @ inst.X @ R)
    for f in (hs_chain_check, hs_reverse_check):
        r1, r2 = f(inst, 0.3, 3), f(rot, 0.3, 3)
        for u, v in ((r1.middle, r2.middle), (r1.upper, r2.upper)):
            assert abs(u - v) <= 1e-10 * abs(u)


def test_x_scaling_scales_by_square():
    inst = random_instance(9, 3)
    for c in (0.1, 7.0):
        scaled = HsInstance(inst.A, inst.B, c * inst.X)
        r1, r2 = hs_chain_check(inst, 0.7, 2), hs_chain_check(scaled, 0.7, 2)
        assert r2.middle == pytest.approx(c * c * r1.middle, rel=1e-12)
        assert r2.lower == pytest.approx(c * c * r1.lower, rel=1e-12)
        assert r2.passed == r1.passed


def test_identity_triple_is_tight():
    inst = HsInstance(np.eye(3), np.eye(3), np.eye(3))
    rep = hs_chain_check(inst, 0.5, 1)
    assert rep.lower == rep.middle == rep.upper == pytest.approx(3.0, rel=1e-15)


# ---------------------------------------------------------------- variants


def test_minus_sign_fails_on_identity_triple():
    inst = HsInstance(np.eye(3), np.eye(3), np.eye(3))
    rep = hs_chain_check(inst, 0.5, 1, sign="minus")
    assert rep.middle == 0.0 and rep.lower == pytest.approx(3.0, rel=1e-15)
    assert not rep.passed and rep.sign_variant == "minus"
    assert hs_chain_check(inst, 0.5, 1).passed


def test_display_sum_form_fails_somewhere():
    inst = HsInstance([[1.0]], [[100.0]], [[1.0]])
    assert not hs_reverse_check(inst, 0.6, 3, sum_form="display").passed
    assert hs_reverse_check(inst, 0.6, 3).passed


def test_bad_variant_names():
    inst = HsInstance(np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(UsageError):
        hs_chain_check(inst, 0.3, 1, sign="times")
    with pytest.raises(UsageError):
        hs_reverse_check(inst, 0.3, 1, sum_form="other")


def test_report_record_fields():
    rec = hs_chain_check(random_instance(1, 2), 0.3, 2).to_record()
    assert set(rec) == {"check", "nu", "t", "dims", "lower", "middle", "upper", "slacks", "sign_variant", "pass"}
    assert len(rec["slacks"]) == 2
    assert len(hs_reverse_check(random_instance(1, 2), 0.3, 2).to_record()["slacks"]) == 1
