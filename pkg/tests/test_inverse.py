from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfcx, gamma as gamma_fn

from randtime.catalog import (
    AlphaStable,
    CompoundPoisson,
    DistributedOrder,
    Exponential,
    Gamma,
    SumStable,
    TruncatedStable,
    default_catalog,
    kernel_laplace_K,
)
from randtime.errors import DomainError, UnsupportedSpecError
from randtime.inverse import (
    asymptotic_laplace,
    auto_method,
    density,
    density_slice,
    density_values,
    double_laplace,
    laplace_functional,
    moment_first,
)
from randtime.special import mittag_leffler

DENSITY_SPECS = [s for s in default_catalog() if not isinstance(s, CompoundPoisson)]
IDS = [s.variant for s in DENSITY_SPECS]
GS_N = 16


def half_normal(t, tau):
    # E(t) for the 1/2-stable subordinator is |N(0, 2t)|
    return np.exp(-np.asarray(tau) ** 2 / (4.0 * t)) / math.sqrt(math.pi * t)


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------


def test_half_stable_density_examples():
    assert density(AlphaStable(0.5), 1.0, 1.0) == pytest.approx(math.exp(-0.25) / math.sqrt(math.pi), rel=1e-7)
    assert density(AlphaStable(0.5), 1.0, 1e-12) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-7)


@pytest.mark.parametrize("method", ["wright", "euler", "dehoog", "talbot"])
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_half_stable_density_against_closed_form(method, t):
    taus = np.array([0.05, 0.3, 1.0, 2.5]) * math.sqrt(t)
    got = density_values(AlphaStable(0.5), t, taus, method)
    np.testing.assert_allclose(got, half_normal(t, taus), rtol=1e-5)


def test_sum_stable_talbot_and_gaver_stehfest_agree():
    spec = SumStable(0.3, 0.7)
    a = density(spec, 1.0, 0.5, method="talbot")
    b = density(spec, 1.0, 0.5, method="gaver-stehfest", n=GS_N)
    assert abs(a - b) <= 1e-4


def test_auto_method_choice():
    assert auto_method(TruncatedStable(0.5, 1.0)) == "dehoog"
    assert auto_method(Gamma(1.0, 1.0)) == "euler"


def test_dehoog_far_tail_underflow():
    # transform samples fall into the subnormal range at the end of the grid
    g = density_values(TruncatedStable(0.5, 1.0), 19.0, np.array([659.27, 30.0]), "dehoog")
    assert np.all(np.isfinite(g))
    assert abs(g[0]) <= 1e-30
    assert g[1] == pytest.approx(density(TruncatedStable(0.5, 1.0), 19.0, 30.0, method="euler"), rel=1e-4)


@pytest.mark.parametrize("spec", DENSITY_SPECS, ids=IDS)
def test_density_nonnegative_on_slice(spec):
    sl = density_slice(spec, 2.0)
    assert np.all(sl.g >= 0)
    assert np.all(np.diff(sl.tau) > 0) and sl.tau[0] >= 0


def test_compound_poisson_density_unsupported():
    spec = CompoundPoisson(1.0, Exponential(1.0))
    with pytest.raises(UnsupportedSpecError):
        density(spec, 1.0, 1.0)
    with pytest.raises(UnsupportedSpecError):
        density_slice(spec, 1.0)


@pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, math.nan)])
def test_density_domain(args):
    with pytest.raises(DomainError):
        density(Gamma(1.0, 1.0), *args)


def test_density_unknown_method():
    with pytest.raises(DomainError):
        density(Gamma(1.0, 1.0), 1.0, 1.0, method="nope")
    with pytest.raises(DomainError):
        density(Gamma(1.0, 1.0), 1.0, 1.0, method="wright")


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(spec=st.sampled_from(DENSITY_SPECS), log_t=st.floats(-2.0, 2.0))
def test_slice_mass_is_one(spec, log_t):
    sl = density_slice(spec, 10.0**log_t)
    assert abs(sl.mass + sl.tail_bound - 1.0) <= 1e-4
    assert 0.0 <= sl.tail_bound <= 1e-7


def test_slice_expectation_matches_half_normal_mean():
    sl = density_slice(AlphaStable(0.5), 4.0)
    assert sl.expect(lambda tau: tau) == pytest.approx(2.0 * math.sqrt(4.0 / math.pi), rel=1e-8)


def test_slice_csv(tmp_path):
    sl = density_slice(Gamma(1.0, 1.0), 1.5)
    p = tmp_path / "slice.csv"
    sl.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0].startswith("# spec=") and lines[0].endswith("t=1.5")
    assert '"variant": "Gamma"' in lines[0]
    assert lines[1] == "tau,g"
    data = np.loadtxt(p, delimiter=",", skiprows=2)
    np.testing.assert_array_equal(data[:, 0], sl.tau)
    np.testing.assert_array_equal(data[:, 1], sl.g)


# ---------------------------------------------------------------------------
# Laplace functional and asymptotics
# ---------------------------------------------------------------------------


def test_laplace_functional_half_stable_example():
    # E_{1/2}(-1) = exp(1) erfc(1)
    assert laplace_functional(AlphaStable(0.5), 1.0, 1.0) == pytest.approx(erfcx(1.0), rel=1e-6)
    assert erfcx(1.0) == pytest.approx(0.4275836, abs=1e-7)


@pytest.mark.parametrize("alpha", [0.3, 0.7, 0.9])
@pytest.mark.parametrize("t", [0.5, 5.0])
def test_laplace_functional_is_mittag_leffler(alpha, t):
    got = laplace_functional(AlphaStable(alpha), t, 1.3)
    assert got == pytest.approx(mittag_leffler(alpha, -1.3 * t**alpha).value, rel=1e-5)


@pytest.mark.parametrize("spec", DENSITY_SPECS, ids=IDS)
def test_laplace_functional_small_z(spec):
    assert laplace_functional(spec, 3.0, 1e-12) == pytest.approx(1.0, abs=1e-6)
    assert laplace_functional(spec, 3.0, 0.0) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("spec", DENSITY_SPECS, ids=IDS)
def test_laplace_functional_decreasing_in_z(spec):
    vals = [laplace_functional(spec, 2.0, z) for z in (0.1, 0.5, 1.0, 4.0)]
    assert np.all(np.diff(vals) < 0)


def _sum_stable_laplace_oracle(t, z):
    import mpmath as mp

    mp.mp.dps = 30
    F = lambda s: (s**-0.7 + s**-0.3) / (s * (s**-0.7 + s**-0.3) + z)  # noqa: E731
    return float(mp.invertlaplace(F, t, method="talbot"))


@pytest.mark.parametrize("t", [100.0, 1e4])
def test_sum_stable_laplace_against_time_transform(t):
    spec = SumStable(0.3, 0.7)
    assert laplace_functional(spec, t, 1.0) == pytest.approx(_sum_stable_laplace_oracle(t, 1.0), rel=1e-6)


@pytest.mark.xfail(strict=True, reason="the leading-order equivalent is still 20% off at t=100; correction decays like t^-0.3")
def test_sum_stable_laplace_near_asymptotics_at_moderate_time():
    spec = SumStable(0.3, 0.7)
    a, b = laplace_functional(spec, 100.0, 1.0), asymptotic_laplace(spec, 100.0, 1.0)
    assert abs(a / b - 1.0) <= 0.10


def test_sum_stable_laplace_approaches_asymptotics():
    spec = SumStable(0.3, 0.7)
    gaps = [abs(laplace_functional(spec, t, 1.0) / asymptotic_laplace(spec, t, 1.0) - 1.0) for t in (1e2, 1e3, 1e4, 1e5)]
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] <= 0.03


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_asymptotic_laplace_stable(alpha):
    t, z = 50.0, 2.0
    expected = t**-alpha / (z * gamma_fn(1.0 - alpha))
    assert asymptotic_laplace(AlphaStable(alpha), t, z) == pytest.approx(expected, rel=1e-13)


def test_asymptotic_laplace_sum_stable():
    t = 1e4
    expected = 0.5 * t**-0.3 * (1.0 + t**-0.4) / gamma_fn(0.7)
    assert asymptotic_laplace(SumStable(0.3, 0.7), t, 2.0) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("spec", [Gamma(1.0, 1.0), CompoundPoisson(1.0, Exponential(1.0))], ids=["Gamma", "CPP"])
def test_asymptotic_laplace_unsupported(spec):
    with pytest.raises(UnsupportedSpecError):
        asymptotic_laplace(spec, 10.0, 1.0)


def test_double_laplace_point():
    spec, lam, p = SumStable(0.3, 0.7), 1.0, 0.5
    K = complex(kernel_laplace_K(spec, lam)).real
    assert double_laplace(spec, lam, p) == pytest.approx(K / (lam * K + p), rel=1e-3)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def test_moment_first_half_stable():
    assert moment_first(AlphaStable(0.5), 1.0) == pytest.approx(1.0 / gamma_fn(1.5), rel=1e-6)
    assert moment_first(AlphaStable(0.5), 0.0) == 0.0


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("t", [0.01, 1.0, 100.0])
def test_moment_first_stable_power_law(alpha, t):
    assert moment_first(AlphaStable(alpha), t) == pytest.approx(t**alpha / gamma_fn(1.0 + alpha), rel=1e-5)


def test_moment_first_distributed_order_talbot_vs_gaver_stehfest():
    spec = DistributedOrder()
    a = moment_first(spec, 10.0, method="talbot")
    b = moment_first(spec, 10.0, method="gaver-stehfest", n=GS_N)
    assert abs(a - b) <= 1e-3


@pytest.mark.parametrize("t", [0.5, 3.0])
def test_moment_first_gamma_against_passage_integral(t):
    # E[E(t)] = int_0^inf P(S(r) <= t) dr with S(r) ~ Gamma(shape r, rate 1)
    from scipy import integrate
    from scipy.special import gammainc

    oracle = integrate.quad(lambda r: gammainc(r, t) if r > 0 else 1.0, 0.0, np.inf, limit=200)[0]
    assert moment_first(Gamma(1.0, 1.0), t) == pytest.approx(oracle, rel=1e-7)


@pytest.mark.parametrize("spec", DENSITY_SPECS, ids=IDS)
def test_moment_first_matches_slice(spec):
    sl = density_slice(spec, 2.0)
    assert moment_first(spec, 2.0) == pytest.approx(sl.expect(lambda tau: tau), rel=1e-5)
