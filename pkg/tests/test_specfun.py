import math

import numpy as np
import pytest
from scipy import integrate

from backhaul_sop import specfun
from backhaul_sop.specfun import SpecfunDomainError, ei_neg, exp_ei_neg_scaled, scaled_en


def quad_ei_neg(x):
    """Independent oracle: -int_x^inf e^-t / t dt."""
    value, _ = integrate.quad(lambda t: math.exp(-t) / t, x, math.inf, epsabs=0, epsrel=2e-14, limit=200)
    return -value


def quad_scaled(x):
    """Independent oracle for exp(x) Ei(-x) = -int_0^inf e^-u / (u + x) du."""
    points = [0.0, x, 10 * x + 1, math.inf] if x < 1 else [0.0, 1.0, math.inf]
    total = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        total += integrate.quad(lambda u: math.exp(-u) / (u + x), lo, hi, epsabs=0, epsrel=2e-14, limit=400)[0]
    return -total


def asymptotic_scaled(x, terms=8):
    return -sum((-1) ** n * math.factorial(n) / x ** (n + 1) for n in range(terms))


def test_ei_neg_reference_values():
    assert ei_neg(1.0) == pytest.approx(quad_ei_neg(1.0), rel=1e-12)
    assert ei_neg(1.0) == pytest.approx(-0.2193839343955202737, rel=1e-14)
    assert ei_neg(10.0) == pytest.approx(quad_ei_neg(10.0), rel=1e-11)
    assert ei_neg(10.0) == pytest.approx(-4.156968929685324277e-06, rel=1e-13)


def test_ei_neg_vanishes_from_below():
    assert -1e-260 < ei_neg(600.0) < 0
    assert ei_neg(1e4) == 0.0


@pytest.mark.parametrize("fn", [ei_neg, exp_ei_neg_scaled])
@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_domain(fn, bad):
    with pytest.raises(SpecfunDomainError):
        fn(bad)


def test_scaled_reference_values():
    assert exp_ei_neg_scaled(1.0).value == pytest.approx(-0.5963473623231940743, rel=1e-14)
    assert exp_ei_neg_scaled(1000.0).value == pytest.approx(asymptotic_scaled(1000.0), rel=1e-15)
    assert exp_ei_neg_scaled(1000.0).value == pytest.approx(-0.000999002, rel=1e-6)


def test_scaled_consistent_with_naive_product():
    assert exp_ei_neg_scaled(0.5).value == pytest.approx(math.exp(0.5) * ei_neg(0.5), rel=1e-12)


@pytest.mark.parametrize("x", np.logspace(-4, math.log10(700), 25))
def test_scaled_matches_quadrature(x):
    assert exp_ei_neg_scaled(x).value == pytest.approx(quad_scaled(x), rel=1e-10)


def test_scaled_finite_negative_increasing():
    xs = np.logspace(-4, 6, 400)
    values = np.array([exp_ei_neg_scaled(x).value for x in xs])
    assert np.all(np.isfinite(values))
    assert np.all(values < 0)
    assert np.all(np.diff(values) > 0)


def test_scaled_bounds():
    for x in np.logspace(-6, 6, 300):
        v = exp_ei_neg_scaled(x).value
        assert -1 / x < v < -1 / (x + 1)


def test_error_estimate_is_tight():
    for x in np.logspace(-6, math.log10(700), 200):
        r = exp_ei_neg_scaled(x)
        assert r.abs_err_est <= 1e-12 * abs(r.value) + 1e-300


def test_crossover_consistency():
    x = specfun.SERIES_CUTOFF
    for n in (1, 2, 3, 7):
        series = math.exp(x) * specfun._en_series(n, x)[0]
        cf = specfun._scaled_en_cf(n, x)[0]
        assert series == pytest.approx(cf, rel=1e-10)


def quad_scaled_en(n, x):
    # exp(x) E_n(x) = int_1^inf exp(-x (t - 1)) t^-n dt
    return integrate.quad(lambda t: math.exp(-x * (t - 1)) * t ** -n, 1, math.inf, epsabs=0, epsrel=2e-14, limit=200)[0]


@pytest.mark.parametrize("n", [1, 2, 3, 10, 40])
@pytest.mark.parametrize("x", [1e-3, 0.7, 1.3, 25.0, 180.0])
def test_scaled_en_matches_quadrature(n, x):
    assert scaled_en(n, x) == pytest.approx(quad_scaled_en(n, x), rel=1e-10)


def test_scaled_en_recurrence():
    for x in (0.05, 0.9, 3.0, 60.0):
        for n in range(1, 12):
            lhs = scaled_en(n + 1, x)
            rhs = (1 - x * scaled_en(n, x)) / n
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-15)
