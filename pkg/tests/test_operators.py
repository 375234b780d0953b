import numpy as np
import pytest

from kantyoung import scalar
from kantyoung.dense import SpdMatrix, maxabs
from kantyoung.errors import HypothesisError, UsageError
from kantyoung.harness import gen_ordered_pair
from kantyoung.operators import (
    OrderedPair,
    liao_wu_baseline_check,
    op_chain_check,
    op_heinz_check,
    op_refinement_sum,
    op_reverse_check,
    scaled,
)

NUS = (0.1, 0.25, 0.5, 0.7, 0.9)


def diag_pair(a, b):
    return OrderedPair(np.diag(a), np.diag(b))


def random_pairs(count, seed=0):
    rng = np.random.default_rng(seed)
    for i in range(count):
        dim = int(rng.choice([1, 2, 3, 5, 8]))
        gap = float(rng.choice([1.0, 1.5, 10.0]))
        yield gen_ordered_pair([seed, i], dim, gap), float(rng.choice(NUS)), int(rng.integers(1, 4))


# ---------------------------------------------------------------- instance


def test_hypothesis_violation_names_spectra():
    with pytest.raises(HypothesisError, match="M\\(A\\) = 3"):
        diag_pair([1.0, 3.0], [2.0, 5.0])


def test_touching_spectra_accepted():
    p = diag_pair([1.0, 2.0], [2.0, 3.0])
    assert p.h == 1.0 and p.h_spread == 3.0


def test_pair_dimension_mismatch():
    with pytest.raises(UsageError):
        OrderedPair(np.eye(2), 2 * np.eye(3))


# ---------------------------------------------------------------- refinement sum


def test_op_refinement_sum_depth_one():
    p = gen_ordered_pair(7, 4, 1.5)
    S = op_refinement_sum(p, 0.3, 1)
    expected = 0.3 * (p.A.array - 2 * p.geo(0.5) + p.B.array)
    assert maxabs(S - expected) <= 1e-13 * maxabs(expected)


def test_op_refinement_sum_equal_matrices_vanishes():
    S = op_refinement_sum(OrderedPair(2 * np.eye(2), 2 * np.eye(2)), 0.37, 3)
    assert maxabs(S) <= 1e-15
    p = OrderedPair(SpdMatrix(np.diag([1.0, 2.0])), SpdMatrix(np.diag([2.0, 2.0])))
    assert p.h == 1.0


@pytest.mark.parametrize("nu, n", [(0.3, 1), (0.3, 3), (0.7, 2), (0.9, 3)])
def test_op_refinement_sum_diagonal_and_psd(nu, n):
    a, b = [1.0, 1.5, 2.0], [3.0, 5.0, 8.0]
    S = op_refinement_sum(diag_pair(a, b), nu, n)
    seq = scalar.refinement_seq(nu, n)
    expected = [scalar.refinement_sum(x, y, seq, n)[0] for x, y in zip(a, b)]
    assert np.allclose(np.diag(S), expected, rtol=1e-12, atol=0)
    assert np.linalg.eigvalsh(S).min() >= -1e-14


# ---------------------------------------------------------------- chain


def test_scalar_multiple_pair_reduces_to_scalar_chain():
    rep = op_chain_check(OrderedPair(np.eye(3), 4 * np.eye(3)), 0.3, 2)
    c = scalar.chain_y1(1.0, 4.0, 0.3, 2)
    assert np.allclose(np.diag(rep.lhs_matrix), c.lower, rtol=1e-14)
    assert np.allclose(np.diag(rep.mid_matrix), c.middle, rtol=1e-14)
    assert np.allclose(np.diag(rep.rhs_matrix), c.upper, rtol=1e-14)
    assert rep.passed


def test_diagonal_example_upper_side_needs_spread_ratio():
    # A = diag(1,2), B = diag(4,9), nu = 1/4, n = 1, h = 2 for both entries
    p = diag_pair([1.0, 2.0], [4.0, 9.0])
    rep = op_chain_check(p, "1/4", 1)
    assert np.diag(rep.mid_matrix) == pytest.approx([1.5, 3.1213203435596424], rel=1e-14)
    assert np.diag(rep.lhs_matrix) == pytest.approx([1.4355, 2.9568], abs=1e-4)
    assert rep.passed_left
    # r_1 = R_1 = 1/2, so the upper factor equals the lower one and cannot
    # cover the second entry, whose own ratio 4.5 exceeds h = 2
    assert not rep.passed_right
    assert rep.lambda_min_right == pytest.approx(2.9568 - 3.1213, abs=1e-4)
    assert op_chain_check(p, "1/4", 1, upper_h="spread").passed


def test_chain_lower_side_holds_on_random_pairs():
    for pair, nu, n in random_pairs(40):
        rep = op_chain_check(pair, nu, n)
        assert rep.passed_left, (nu, n, rep.lambda_min_left)
        assert rep.spectral_left >= -1e-12


def test_chain_upper_side_with_spread_ratio_holds():
    for pair, nu, n in random_pairs(40, seed=1):
        assert op_chain_check(pair, nu, n, upper_h="spread").passed


def test_chain_upper_side_with_gap_ratio_fails_somewhere():
    fails = [op_chain_check(p, nu, n) for p, nu, n in random_pairs(40, seed=2)]
    bad = [r for r in fails if not r.passed_right]
    assert bad
    # the failure is a property of the bound, visible on the spectrum as well
    assert all(r.spectral_right < 0 for r in bad)


def test_bad_upper_h():
    with pytest.raises(UsageError):
        op_chain_check(gen_ordered_pair(0, 2, 1.0), 0.3, 1, upper_h="other")


# ---------------------------------------------------------------- reverse


def test_reverse_equal_matrices():
    P = 2.5 * np.eye(3)
    rep = op_reverse_check(OrderedPair(P, P), 0.4, 3)
    assert maxabs(rep.rhs_matrix - rep.lhs_matrix) <= 1e-14 and rep.passed


@pytest.mark.parametrize("h, nu, n", [(4.0, 0.3, 1), (10.0, 0.7, 3), (1.5, 0.25, 2)])
def test_reverse_scalar_multiple(h, nu, n):
    rep = op_reverse_check(OrderedPair(np.eye(2), h * np.eye(2)), nu, n)
    s = scalar.reverse_y2(1.0, h, nu, n)
    assert np.allclose(np.diag(rep.rhs_matrix), s.rhs, rtol=1e-13)
    assert np.allclose(np.diag(rep.lhs_matrix), s.lhs, rtol=1e-15)


def test_reverse_holds_on_random_pairs():
    for pair, nu, n in random_pairs(40, seed=3):
        rep = op_reverse_check(pair, nu, n)
        assert rep.passed and rep.spectral_left >= -1e-12


def test_reverse_display_brackets_fail():
    # unswapped brackets just above nu = 1/2 over-subtract
    p = OrderedPair(np.eye(1), 10.0 * np.eye(1))
    bad = op_reverse_check(p, 0.6, 2, brackets="display")
    assert not bad.passed and bad.spectral_left < -0.01
    assert op_reverse_check(p, 0.6, 2).passed
    with pytest.raises(UsageError):
        op_reverse_check(p, 0.6, 2, brackets="other")


# ---------------------------------------------------------------- Heinz


def test_heinz_at_half_is_chain_at_half():
    p = gen_ordered_pair(4, 3, 1.5)
    chain, _ = op_heinz_check(p, 0.5, 2)
    base = op_chain_check(p, 0.5, 2)
    for u, v in ((chain.lhs_matrix, base.lhs_matrix), (chain.mid_matrix, base.mid_matrix)):
        assert maxabs(u - v) <= 1e-13 * maxabs(v)


def test_heinz_diagonal_matches_scalar_with_global_h():
    a, b = [1.0, 2.0], [3.0, 7.0]
    p = diag_pair(a, b)
    chain, rev = op_heinz_check(p, 0.3, 2)
    kk = scalar.kantorovich(p.h ** 0.25)
    seq = scalar.refinement_seq(0.3, 2)
    for i in range(2):
        s = scalar.heinz_chain(a[i], b[i], 0.3, 2)
        assert chain.mid_matrix[i, i] == pytest.approx(s.middle, rel=1e-12)
        assert chain.lhs_matrix[i, i] == pytest.approx(kk ** seq.r[2] * scalar.heinz_mean(a[i], b[i], 0.3), rel=1e-12)
    assert chain.passed_left and rev.passed


def test_heinz_lower_and_reverse_hold_on_random_pairs():
    for pair, nu, n in random_pairs(30, seed=5):
        chain, rev = op_heinz_check(pair, nu, n)
        assert chain.passed_left and rev.passed


# ---------------------------------------------------------------- baseline


def test_liao_wu_one_by_one_matches_scalar():
    base = scalar.baseline_bounds(1.0, 4.0, 0.3)
    rep = liao_wu_baseline_check(OrderedPair([[1.0]], [[4.0]]), 0.3)
    assert rep.lhs_matrix[0, 0] == pytest.approx(base["liao_wu_lower"].lhs, rel=1e-14)
    assert rep.rhs_matrix[0, 0] == pytest.approx(base["liao_wu_upper"].rhs, rel=1e-14)


def test_liao_wu_half_uses_first_case():
    p = gen_ordered_pair(9, 3, 1.0)
    rep = liao_wu_baseline_check(p, 0.5)
    x = 0.5
    core = p.arith(0.5) - p.geo(0.5)
    low = 2 * x * core + 0.0 * (p.geo(0.5) - 2 * p.geo(0.25) + p.A.array) + p.geo(0.5)
    # r' = min(1, 0) = 0 and r'' = 0 at nu = 1/2
    assert maxabs(rep.lhs_matrix - low) <= 1e-13 * maxabs(low)
    assert rep.passed


def test_liao_wu_holds_on_random_pairs():
    for pair, nu, _ in random_pairs(30, seed=6):
        assert liao_wu_baseline_check(pair, nu).passed


# ---------------------------------------------------------------- reductions


@pytest.mark.parametrize("nu, n", [(0.3, 1), (0.7, 3), (0.25, 2)])
def test_one_by_one_reproduces_scalar(nu, n):
    p = OrderedPair([[1.7]], [[5.3]])
    c = scalar.chain_y1(1.7, 5.3, nu, n)
    rep = op_chain_check(p, nu, n)
    assert rep.lhs_matrix[0, 0] == pytest.approx(c.lower, rel=1e-14)
    assert rep.mid_matrix[0, 0] == pytest.approx(c.middle, rel=1e-13)
    assert rep.rhs_matrix[0, 0] == pytest.approx(c.upper, rel=1e-14)
    assert rep.passed == c.holds()
    r = op_reverse_check(p, nu, n)
    s = scalar.reverse_y2(1.7, 5.3, nu, n)
    assert r.rhs_matrix[0, 0] == pytest.approx(s.rhs, rel=1e-13)
    hc, hr = op_heinz_check(p, nu, n)
    assert hc.mid_matrix[0, 0] == pytest.approx(scalar.heinz_chain(1.7, 5.3, nu, n).middle, rel=1e-13)
    assert hr.rhs_matrix[0, 0] == pytest.approx(scalar.heinz_reverse(1.7, 5.3, nu, n).rhs, rel=1e-13)


def test_scaling_scales_reports():
    p = gen_ordered_pair(3, 4, 1.5)
    for c in (0.01, 3.0, 250.0):
        q = scaled(p, c)
        for f in (op_chain_check, op_reverse_check):
            r1, r2 = f(p, 0.7, 2), f(q, 0.7, 2)
            assert maxabs(r2.lhs_matrix - c * r1.lhs_matrix) <= 1e-12 * maxabs(r2.lhs_matrix)
            assert maxabs(r2.rhs_matrix - c * r1.rhs_matrix) <= 1e-12 * maxabs(r2.rhs_matrix)
            assert r1.passed == r2.passed


def test_report_record_fields():
    rec = op_chain_check(gen_ordered_pair(0, 2, 1.5), 0.3, 1).to_record()
    assert set(rec) == {"check", "nu", "n", "h", "dims", "lambda_min_left", "lambda_min_right", "pass"}
    rev = op_reverse_check(gen_ordered_pair(0, 2, 1.5), 0.3, 1).to_record()
    assert rev["lambda_min_right"] is None
