from fractions import Fraction as F

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from liouville_verify.coefficients import critical_p, critical_q
from liouville_verify.errors import DomainError
from liouville_verify.exact import RatInterval, as_interval
from liouville_verify.thresholds import (LargeGammaFrame, closing_certificate,
                                         discriminant_delta, k1_positive_large_gamma, lemma_grid,
                                         lemma_m2_lt_m1, m1, m1_from_k, m2,
                                         m2_closing_bound_large_n, small_n_verify,
                                         theorem_c_bound, threshold_report, u0)

TOL = mp.mpf(10) ** -20

# frozen from the 50-digit oracle in oracles.py
M1_7 = mp.mpf("3.64787401833683866")
MC_7 = mp.mpf("2.57990936204750")
LARGE_GAMMA = {
    7: {"U0": "0.492787779542421", "Delta": "0.397399349249135", "M2": "0.0509236899168785",
        "K3_U0": "0.0708415971", "S": "0.0883036880"},
    8: {"U0": "0.378487355141796", "Delta": "0.409089003862138", "M2": "0.0487202299045601"},
}


def close(iv: RatInterval, ref, tol=TOL):
    lo, hi = oracles.mpf(iv.lo), oracles.mpf(iv.hi)
    return lo - tol <= ref <= hi + tol


def test_m1_n7_frozen_and_oracle():
    val = m1(7, F(9, 5))
    assert close(val, oracles.m1_uncollapsed(7, F(9, 5)))
    assert close(val, M1_7, mp.mpf(10) ** -16)
    assert val.certainly_gt(F(26, 10))


@settings(max_examples=40, deadline=None)
@given(st.integers(7, 120), st.integers(1, 30))
def test_m1_collapsed_form_matches_uncollapsed(n, k):
    p = 1 + (critical_p(n) - 1) * F(k, 30)
    try:
        val = m1(n, p)
    except DomainError:
        return
    assert close(val, oracles.m1_uncollapsed(n, p), mp.mpf(10) ** -25 * oracles.m1_uncollapsed(n, p))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 100), st.fractions(min_value=F(101, 100), max_value=5, max_denominator=100))
def test_theorem_c_matches_oracle(n, p):
    ref = oracles.theorem_c(n, p)
    assert close(theorem_c_bound(n, p), ref, TOL * ref)


def test_theorem_c_n7_frozen():
    assert close(theorem_c_bound(7, F(9, 5)), MC_7, mp.mpf(10) ** -13)


def test_m1_infinite_below_seven():
    assert m1(6, 2) == float("inf")


@pytest.mark.parametrize("n", [7, 8])
def test_large_gamma_values_against_oracle(n):
    ref = oracles.large_gamma_values(n)
    q = critical_q(critical_p(n))
    rep = u0(n, critical_p(n))
    assert close(rep.U0, ref["U0"])
    assert close(discriminant_delta(n, critical_p(n)), ref["Delta"])
    assert close(rep.K3_U0, ref["K3_U0"])
    assert close(m2(n, critical_p(n)).value, ref["M2"])
    assert rep.ok
    fr = LargeGammaFrame.of(n)
    assert close(as_interval(fr.B0), ref["B0"])
    for key, txt in LARGE_GAMMA[n].items():
        assert abs(ref[key] - mp.mpf(txt)) < mp.mpf(10) ** -(len(txt) - 3)
    assert q == F(2 * (n + 2), 2 * n)


def test_delta_bounds():
    assert discriminant_delta(7, F(9, 5)).certainly_gt(F(284, 1000))
    assert discriminant_delta(8, F(5, 3)).certainly_gt(F(322, 1000))


def test_m2_n7_below_limits():
    rep = m2(7, F(9, 5))
    assert rep.value.certainly_lt(F(8, 10))
    assert all(rep.checks.values())
    assert rep.young_conjugate


@pytest.mark.parametrize("n", [8, 10, 25, 60])
def test_m2_below_large_n_bound(n):
    rep = m2(n, critical_p(n))
    assert rep.value.certainly_lt(m2_closing_bound_large_n(n))


def test_m2_vanishes_off_the_critical_window():
    rep = m2(7, F(3, 2))
    assert rep.zero and rep.value == RatInterval.point(0)


def test_m1_from_k_agrees_at_zero_eps():
    M, *_ = m1_from_k(7, F(9, 5), 0)
    assert M.intersect(m1(7, F(9, 5))) is not None


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_small_n_holds(n):
    rep = small_n_verify(n, critical_p(n))
    assert rep.holds and rep.k5_leading_agrees


def test_small_n_fails_at_seven():
    assert not small_n_verify(7, critical_p(7)).holds


@pytest.mark.parametrize("n", [7, 8, 9, 15, 40, 100])
def test_k1_closed_form(n):
    rep = k1_positive_large_gamma(n)
    assert rep.agree and rep.positive and rep.d1d2


def test_closing_polynomial():
    cert = closing_certificate()
    assert cert.positive


def test_lemma_small_range():
    tab = lemma_m2_lt_m1(range(7, 12), p_points=5)
    assert tab.certified and not tab.inconclusive
    assert len(tab.rows) == 25


def test_lemma_grid_spans_window():
    g = lemma_grid(9, 20)
    assert g[0] == critical_p(9) - F(1, 81) and g[-1] == critical_p(9) and len(g) == 20


def test_threshold_report_widths():
    rep = threshold_report(7, F(9, 5))
    assert rep.widths_ok()
    assert rep.m2_lt_m1 == "certified"
    assert set(rep.enclosures()) == {"M_C", "M1", "U0", "Delta", "M2"}


def test_large_gamma_frame_needs_seven():
    with pytest.raises(DomainError):
        LargeGammaFrame.of(6)
