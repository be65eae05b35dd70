from __future__ import annotations

import math
import sys

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc, gamma

from randtime.errors import DomainError
from randtime.special import (
    lower_incomplete_gamma,
    mittag_leffler,
    mittag_leffler_values,
    upper_incomplete_gamma,
    wright,
    wright_values,
)

mp.mp.dps = 40


def ml_oracle(alpha: float, z: float) -> float:
    """High-precision power series; fine for moderate |z| at 40+ digits."""
    n_min = 2 * abs(z) ** (1 / alpha) + 20  # past the largest term
    with mp.workdps(40 + int(abs(z) ** (1 / alpha) / 2.3)):
        z = mp.mpf(z)
        total, n = mp.mpf(0), 0
        while True:
            term = z**n / mp.gamma(mp.mpf(alpha) * n + 1)
            total += term
            if n > n_min and abs(term) < mp.mpf(10) ** (-50) * max(1, abs(total)):
                return float(total)
            n += 1


def wright_oracle(alpha: float, z: float) -> float:
    """Density of E(1): inverse Laplace transform in t of s^(alpha-1) exp(-z s^alpha) at t = 1."""
    with mp.workdps(40):
        a = mp.mpf(alpha)
        return float(mp.invertlaplace(lambda s: s ** (a - 1) * mp.exp(-z * s**a), 1, method="talbot"))


def test_ml_examples():
    assert mittag_leffler(1.0, 1.0).value == pytest.approx(math.e, rel=1e-14)
    assert mittag_leffler(0.5, 0.0).value == 1.0
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    assert mittag_leffler(0.5, -1.0).value == pytest.approx(math.exp(1.0) * erfc(1.0), rel=1e-12)
    assert mittag_leffler(0.5, -1.0).value == pytest.approx(0.4275835761558070, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9, 1.0])
@pytest.mark.parametrize("z", [-5.0, -3.3, -1.0, -0.01, 0.5, 2.0, 5.0])
def test_ml_series_range(alpha, z):
    r = mittag_leffler(alpha, z)
    if alpha < 0.25 and z > 1:
        # a single positive term of the series already exceeds the double range
        n = int(z ** (1 / alpha) / alpha)  # near the largest term
        assert math.log(z) * n - math.lgamma(alpha * n + 1) > math.log(sys.float_info.max)
        assert r.value == math.inf
        return
    if alpha < 0.25 and z < -1:
        # the power series cancels catastrophically here even in high precision
        expected = ml_laplace_oracle(alpha, -z)
    else:
        expected = ml_oracle(alpha, z)
    assert r.value == pytest.approx(expected, rel=1e-10)
    assert math.isfinite(r.abs_error_estimate)


def ml_laplace_oracle(alpha: float, x: float) -> float:
    """E_alpha(-x) as the inverse Laplace transform of s^(alpha-1)/(s^alpha+1) at x^(1/alpha)."""
    with mp.workdps(40):
        F = lambda s: s ** (alpha - 1) / (s**alpha + 1)  # noqa: E731
        return float(mp.invertlaplace(F, mp.mpf(x) ** (1 / mp.mpf(alpha)), method="talbot"))


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("z", [-6.0, -12.0, -40.0])
def test_ml_negative_axis_beyond_series(alpha, z):
    assert mittag_leffler(alpha, z).value == pytest.approx(ml_laplace_oracle(alpha, -z), rel=1e-7)


@pytest.mark.parametrize("x", [5.5, 20.0, 300.0])
def test_ml_half_order_closed_form(x):
    expected = float(mp.exp(mp.mpf(x) ** 2) * mp.erfc(x))
    assert mittag_leffler(0.5, -x).value == pytest.approx(expected, rel=1e-7)


def test_ml_method_recorded():
    assert mittag_leffler(0.5, -1.0).method == "series"
    assert mittag_leffler(0.5, -100.0).method in ("integral", "asymptotic")


@pytest.mark.parametrize("alpha", [0.0, -0.5, 1.5, math.nan])
def test_ml_domain(alpha):
    with pytest.raises(DomainError):
        mittag_leffler(alpha, -1.0)


@pytest.mark.parametrize("alpha", [0.2, 0.4, 0.6, 0.9])
def test_ml_completely_monotone_proxy(alpha):
    x = np.linspace(0.0, 30.0, 301)
    v = mittag_leffler_values(alpha, -x)
    assert np.all(v > 0)
    assert np.all(np.diff(v) < 0)
    assert np.all(np.diff(v, 2) > -1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_ml_algebraic_tail(alpha):
    x = 1e4
    ratio = mittag_leffler(alpha, -x).value * x * gamma(1 - alpha)
    assert ratio == pytest.approx(1.0, rel=0.05)


def test_ml_values_matches_scalar():
    z = np.array([-30.0, -2.0, 0.0, 1.0])
    np.testing.assert_allclose(mittag_leffler_values(0.6, z), [mittag_leffler(0.6, v).value for v in z], rtol=1e-13)


def test_wright_examples():
    assert wright(0.5, 0.0).value == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    assert wright(0.5, 1.0).value == pytest.approx(math.exp(-0.25) / math.sqrt(math.pi), rel=1e-10)
    v = wright(0.3, 20.0).value
    assert 0.0 <= v <= 1e-3


WRIGHT_CASES = [(a, z) for a in (0.1, 0.3, 0.5) for z in (0.0, 0.2, 1.0, 3.0, 7.5, 10.0)]
WRIGHT_CASES += [(0.7, z) for z in (0.0, 0.2, 1.0, 2.0, 3.0)] + [(0.9, z) for z in (0.0, 0.2, 0.7, 1.0, 1.5)]


@pytest.mark.parametrize("alpha,z", WRIGHT_CASES)
def test_wright_against_laplace_oracle(alpha, z):
    # the contour oracle has an absolute floor near 1e-28
    got = wright(alpha, z).value
    assert got >= 0
    assert got == pytest.approx(wright_oracle(alpha, z), rel=1e-8, abs=1e-25)


@pytest.mark.parametrize("alpha", [0.7, 0.9])
def test_wright_far_tail_small_and_decreasing(alpha):
    z = np.array([3.0, 5.0, 7.5, 10.0])
    v = wright_values(alpha, z)
    assert np.all(v >= 0) and np.all(np.diff(v) <= 0) and v[0] < 1e-2


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_wright_normalisation(alpha):
    from scipy import integrate

    # density of E(1) in tau is W(tau); it must integrate to one
    f = lambda tau: wright(alpha, tau).value  # noqa: E731
    total = sum(integrate.quad(f, a, b, limit=200)[0] for a, b in [(0, 1), (1, 5), (5, 20), (20, 200)])
    assert total == pytest.approx(1.0, abs=1e-6)


def test_wright_domain():
    for a, z in [(0.0, 1.0), (1.0, 1.0), (0.5, -1.0)]:
        with pytest.raises(DomainError):
            wright(a, z)


def test_wright_values_vectorised():
    z = np.array([0.0, 0.5, 4.0])
    np.testing.assert_allclose(wright_values(0.4, z), [wright(0.4, v).value for v in z], rtol=1e-13)


def test_upper_gamma_examples():
    assert upper_incomplete_gamma(1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    assert upper_incomplete_gamma(0.0, 1.0) == pytest.approx(float(mp.e1(1)), rel=1e-10)
    assert upper_incomplete_gamma(0.0, 1.0) == pytest.approx(0.2193839344, rel=1e-9)
    # Gamma(1/2, z) = sqrt(pi) erfc(sqrt z)
    assert upper_incomplete_gamma(0.5, 0.25) == pytest.approx(math.sqrt(math.pi) * erfc(0.5), rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(nu=st.floats(-3.0, 8.0), z=st.floats(1e-3, 60.0))
def test_upper_gamma_against_mpmath(nu, z):
    expected = float(mp.gammainc(nu, z))
    assert upper_incomplete_gamma(nu, z) == pytest.approx(expected, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(nu=st.floats(0.05, 10.0), z=st.floats(1e-3, 40.0))
def test_gamma_split(nu, z):
    total = upper_incomplete_gamma(nu, z) + lower_incomplete_gamma(nu, z)
    assert total == pytest.approx(gamma(nu), rel=1e-10)


@pytest.mark.parametrize("z", [0.0, -1.0])
def test_upper_gamma_domain(z):
    with pytest.raises(DomainError):
        upper_incomplete_gamma(0.5, z)
