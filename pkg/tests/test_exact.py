from fractions import Fraction as F

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_verify.errors import DomainError
from liouville_verify.exact import (QuadExt, RatInterval, UniPoly, as_interval, count_roots,
                                    escalating, exact_sign, interval_exp, interval_log,
                                    interval_pow, poly_positive_on, quad, to_rational, workprec)

mp.mp.dps = 50
rats = st.fractions(min_value=-50, max_value=50, max_denominator=1000)
pos_rats = st.fractions(min_value=F(1, 1000), max_value=1000, max_denominator=1000)
radicands = st.sampled_from([2, 3, 5, 6, 7, 10, 11, 13, 14, 15])


def mpq(x):
    return mp.mpf(x.numerator) / x.denominator


def mp_of(x):
    if isinstance(x, QuadExt):
        return mpq(x.a) + mpq(x.b) * mp.sqrt(mpq(x.d))
    return mpq(F(x))


def inside(iv, val):
    # slack covers the oracle's own rounding when the enclosure is a point
    slack = mp.mpf(10) ** -40 * (1 + abs(val))
    return mpq(F(iv.lo)) - slack <= val <= mpq(F(iv.hi)) + slack


def test_to_rational_parses_ratios_and_decimals():
    assert to_rational("9/5") == F(9, 5)
    assert to_rational("1.7") == F(17, 10)
    assert to_rational(3) == F(3)
    with pytest.raises(TypeError):
        to_rational(object())


def test_quad_normalizes_square_radicands():
    assert quad(1, 2, 4) == 5
    assert QuadExt(0, 1, 8).d == 2 and QuadExt(0, 1, 8).b == 2
    with pytest.raises(DomainError):
        QuadExt(0, 1, 9)


@given(rats, rats, rats, rats, radicands)
def test_quadext_field_operations_match_mpmath(a, b, c, e, d):
    x, y = quad(a, b, d), quad(c, e, d)
    for got, want in ((x + y, mp_of(x) + mp_of(y)), (x - y, mp_of(x) - mp_of(y)),
                      (x * y, mp_of(x) * mp_of(y))):
        assert abs(mp_of(got) - want) < mp.mpf(10) ** -40
    if y != 0:
        assert abs(mp_of(x / y) - mp_of(x) / mp_of(y)) < mp.mpf(10) ** -35 * (1 + abs(mp_of(x / y)))


@given(rats, rats, radicands)
def test_exact_sign_agrees_with_high_precision(a, b, d):
    x = quad(a, b, d)
    v = mp_of(x)
    assert exact_sign(x) == (0 if v == 0 else (1 if v > 0 else -1))


def test_mixed_radicands_fall_back_to_intervals():
    s = QuadExt(0, 1, 10) + QuadExt(0, 1, 2)
    assert isinstance(s, RatInterval)
    assert inside(s, mp.sqrt(10) + mp.sqrt(2))
    assert QuadExt(0, 1, 10) > QuadExt(0, 1, 2)


@given(pos_rats)
def test_interval_log_exp_enclose_true_values(x):
    lg = interval_log(x)
    assert inside(lg, mp.log(mpq(x)))
    ex = interval_exp(x / 100)
    assert inside(ex, mp.exp(mpq(x / 100)))
    assert lg.width < F(1, 10**30)


@given(pos_rats, st.fractions(min_value=-3, max_value=3, max_denominator=50))
def test_interval_pow_encloses(b, e):
    iv = interval_pow(b, e)
    assert inside(iv, mp.power(mpq(b), mpq(e)))


@given(pos_rats)
def test_interval_sqrt_encloses_and_is_tight(x):
    iv = as_interval(x).sqrt()
    assert inside(iv, mp.sqrt(mpq(x)))
    assert iv.width < F(1, 10**30)


def test_precision_context_changes_width():
    with workprec(64):
        w64 = interval_log(F(3)).width
    with workprec(256):
        w256 = interval_log(F(3)).width
    assert w256 < w64


def test_escalating_reports_bits():
    calls = []

    def fn():
        calls.append(1)
        return "done" if len(calls) > 1 else None

    out, bits = escalating(fn, start=64)
    assert out == "done" and bits > 64


def test_decimal_bounds_round_outward():
    iv = RatInterval(F(1, 3), F(2, 3))
    lo, hi = iv.decimal_bounds(5)
    assert F(lo) <= F(1, 3) and F(hi) >= F(2, 3)


@settings(max_examples=60)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=5))
def test_sturm_count_matches_numpy(roots):
    poly = UniPoly.const(1, "x")
    for r in roots:
        poly = poly * (UniPoly.gen("x") - UniPoly.const(r, "x"))
    lo, hi = F(-13, 2), F(13, 2)
    assert count_roots(poly, lo, hi) == len(set(roots))
    assert count_roots(poly, F(1, 2), F(7, 2)) == len({r for r in roots if 1 <= r <= 3})


def test_poly_positive_on_certificates():
    x = UniPoly.gen("n")
    cert = poly_positive_on(x * x - UniPoly.const(2, "n"), 2)
    assert cert.positive
    bad = poly_positive_on(x * x - UniPoly.const(10, "n"), 2)
    assert not bad.positive and bad.witness is not None or bad.root is not None


def test_unipoly_evaluation_matches_numpy():
    p = UniPoly.from_desc([3, -2, 0, 5], "x")
    for v in (-2, 0, F(3, 7), 4):
        assert p(F(v)) == np.polyval([3, -2, 0, 5], F(v))
