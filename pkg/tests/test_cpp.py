from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randtime.catalog import CompoundPoisson, Deterministic, Exponential, Pareto
from randtime.cpp import (
    ETA_MARGIN,
    CppBoundInput,
    deterministic_closed_form,
    exponential_bound,
    inverse_cpp_laplace,
    inverse_cpp_laplace_detail,
    partial_sum_tail,
    polynomial_bound,
    polynomial_constant,
)
from randtime.errors import DomainError, TruncationTooSmallError
from randtime.sampling import sample_inverse_batch

JUMPS = [Exponential(1.0), Deterministic(1.0), Exponential(2.5), Deterministic(0.4)]


def unit_input(jumps, **kw):
    return CppBoundInput(1.0, jumps, c=1.0, beta=1.0, **kw)


def _mc_laplace(inp, t, n, seed):
    E = sample_inverse_batch(CompoundPoisson(inp.rate, inp.jumps), t, n, seed)
    x = np.exp(-inp.s * E)
    return x.mean(), x.std(ddof=1) / math.sqrt(n)


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("jumps", JUMPS + [Pareto(1.5, 1.0)], ids=lambda j: j.variant)
def test_series_at_zero_is_one(jumps):
    assert inverse_cpp_laplace(unit_input(jumps), 0.0) == 1.0


def test_deterministic_example():
    # brute force: (1/2) sum_{k >= 3} (1/2)^k
    brute = 0.5 * sum(0.5**k for k in range(3, 200))
    assert brute == pytest.approx(0.125, abs=1e-15)
    assert inverse_cpp_laplace(unit_input(Deterministic(1.0)), 2.5) == pytest.approx(brute, abs=1e-13)


@pytest.mark.parametrize("r,rate,cb", [(1.0, 1.0, 1.0), (0.4, 2.0, 0.5), (2.5, 0.3, 3.0)])
def test_deterministic_matches_closed_form(r, rate, cb):
    inp = CppBoundInput(rate, Deterministic(r), c=cb, beta=1.0)
    q = rate / (rate + cb)
    for t in np.linspace(0.0, 20.0, 401):
        expected = 1.0 if t == 0 else q ** math.ceil(t / r - 1e-12)
        assert inverse_cpp_laplace(inp, float(t)) == pytest.approx(expected, abs=1e-10)
        assert deterministic_closed_form(inp, float(t)) == pytest.approx(expected, abs=1e-15)


def test_exponential_series_matches_sampling():
    inp = unit_input(Exponential(1.0))
    mean, se = _mc_laplace(inp, 5.0, 1_000_000, 2025)
    assert abs(inverse_cpp_laplace(inp, 5.0, K=200) - mean) <= 3.0 * se


@pytest.mark.parametrize("jumps", [Exponential(1.0), Deterministic(1.0)], ids=lambda j: j.variant)
def test_series_matches_sampling_on_grid(jumps):
    inp = unit_input(jumps)
    ts = np.array([1.0, 2.0, 5.0, 10.0])
    E = sample_inverse_batch(CompoundPoisson(1.0, jumps), ts, 200_000, 5)
    x = np.exp(-E)
    mean, se = x.mean(axis=0), x.std(axis=0, ddof=1) / math.sqrt(x.shape[0])
    for i, t in enumerate(ts):
        assert abs(inverse_cpp_laplace(inp, float(t)) - mean[i]) <= 3.0 * se[i]


def test_exponential_partial_sums_are_erlang_tails():
    from scipy import stats

    p, approx = partial_sum_tail(Exponential(2.0), 1.5, 6)
    assert not approx
    np.testing.assert_allclose(p, [stats.gamma(k, scale=0.5).sf(1.5) for k in range(1, 7)], rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    jumps=st.sampled_from(JUMPS),
    rate=st.floats(0.2, 5.0),
    c=st.floats(0.1, 3.0),
    ts=st.lists(st.floats(0.0, 40.0), min_size=2, max_size=8),
)
def test_series_in_unit_interval_and_nonincreasing(jumps, rate, c, ts):
    inp = CppBoundInput(rate, jumps, c=c, beta=1.0)
    vals = np.array([inverse_cpp_laplace(inp, t) for t in sorted(ts)])
    assert np.all(vals > 0) and np.all(vals <= 1.0)
    assert np.all(np.diff(vals) <= 1e-13)


def test_truncation_too_small():
    inp = unit_input(Exponential(1.0))
    with pytest.raises(TruncationTooSmallError):
        inverse_cpp_laplace(inp, 5.0, K=10)
    with pytest.raises(DomainError):
        inverse_cpp_laplace(inp, 5.0, K=0)
    with pytest.raises(DomainError):
        inverse_cpp_laplace(inp, -1.0)


def test_explicit_truncation_error_estimate():
    d = inverse_cpp_laplace_detail(unit_input(Exponential(1.0)), 5.0, K=200)
    assert d.terms == 200 and not d.approximate
    assert d.error_estimate == pytest.approx(0.5**201)


def test_pareto_series_is_flagged_and_bracketed():
    d = inverse_cpp_laplace_detail(unit_input(Pareto(1.5, 1.0)), 4.0)
    assert d.approximate
    assert 0.0 < d.error_estimate < 1e-2
    assert 0.0 < d.value < 1.0


# ---------------------------------------------------------------------------
# polynomial bound
# ---------------------------------------------------------------------------


def test_polynomial_bound_examples():
    inp = unit_input(Exponential(1.0), moment_order=2.0)
    assert polynomial_bound(inp, 10.0, 0.0) == 0.0
    assert polynomial_bound(inp, 3.0, 1.0) / polynomial_bound(inp, 6.0, 1.0) == pytest.approx(4.0, rel=1e-14)


def test_polynomial_constant_against_direct_sum():
    # C = (1/2) E[R^2] sum_k k^3 2^-k with E[R^2] = 2 and sum_k k^3 2^-k = 26
    inp = unit_input(Exponential(1.0), moment_order=2.0)
    assert polynomial_constant(inp) == pytest.approx(0.5 * 2.0 * 26.0, rel=1e-10)


def test_polynomial_bound_holds_against_sampling():
    # OU flow with rate c = 1 and f(x) = x: v(t, x) - f(0) = x E exp(-E(t))
    inp = unit_input(Exponential(1.0), moment_order=2.0)
    mean, se = _mc_laplace(inp, 10.0, 200_000, 11)
    bound = polynomial_bound(inp, 10.0, 1.0)
    assert math.isfinite(bound)
    assert mean - 3.0 * se <= bound


def test_polynomial_bound_domain():
    inp = unit_input(Exponential(1.0), moment_order=1.0)
    with pytest.raises(DomainError):
        polynomial_bound(inp, 0.0, 1.0)
    with pytest.raises(DomainError):
        polynomial_bound(inp, 1.0, -1.0)
    with pytest.raises(DomainError):
        polynomial_bound(unit_input(Exponential(1.0)), 1.0, 1.0)


# ---------------------------------------------------------------------------
# exponential bound
# ---------------------------------------------------------------------------


def test_exponential_rate_deterministic():
    # constraint e^eta / 2 <= 1 - margin
    eta, bound = exponential_bound(unit_input(Deterministic(1.0)), 1.0, 0.0)
    assert bound == 0.0
    assert eta == pytest.approx(math.log(2.0 * (1.0 - ETA_MARGIN)), abs=1e-12)
    assert eta < math.log(2.0)


def test_exponential_rate_exponential_jumps():
    # lam mu / ((mu - eta)(lam + s)) = 1 - margin, lam = mu = s = 1
    eta, _ = exponential_bound(unit_input(Exponential(1.0)), 1.0, 1.0)
    assert eta == pytest.approx(1.0 - 0.5 / (1.0 - ETA_MARGIN), abs=1e-12)


@pytest.mark.parametrize("jumps", [Exponential(1.0), Deterministic(1.0)], ids=lambda j: j.variant)
def test_series_decays_at_least_at_rate_eta(jumps):
    inp = unit_input(jumps)
    eta, _ = exponential_bound(inp, 1.0, 1.0)
    grid = np.linspace(5.0, 50.0, 46)
    vals = np.array([inverse_cpp_laplace(inp, float(t)) for t in grid])
    slope = np.polyfit(grid, np.log(vals), 1)[0]
    assert slope <= -eta + 0.05


@pytest.mark.parametrize("t", [1.0, 5.0, 20.0])
def test_exponential_bound_dominates_series(t):
    inp = unit_input(Exponential(1.0))
    _, bound = exponential_bound(inp, t, 1.0)
    assert inverse_cpp_laplace(inp, t) <= bound


def test_input_validation():
    with pytest.raises(DomainError):
        unit_input(Pareto(1.5, 1.0), moment_order=2.0)
    with pytest.raises(DomainError):
        unit_input(Pareto(1.5, 1.0), mgf_radius=0.1)
    with pytest.raises(DomainError):
        unit_input(Exponential(1.0), mgf_radius=1.0)
    with pytest.raises(DomainError):
        CppBoundInput(1.0, Exponential(1.0), c=1.0, beta=1.5)
    with pytest.raises(DomainError):
        CppBoundInput(0.0, Exponential(1.0), c=1.0, beta=1.0)
    with pytest.raises(DomainError):
        exponential_bound(unit_input(Pareto(1.5, 1.0)), 1.0, 1.0)
    assert unit_input(Pareto(1.5, 1.0), moment_order=1.0).moment_order == 1.0
