from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.special import erf, erfc, gamma as gamma_fn

from randtime import rng
from randtime.catalog import (
    AlphaStable,
    CompoundPoisson,
    Deterministic,
    Exponential,
    ExpWeighted,
    Gamma,
    Pareto,
    SumStable,
    TruncatedStable,
    default_catalog,
)
from randtime.cpp import CppBoundInput, inverse_cpp_laplace, inverse_cpp_laplace_detail
from randtime.errors import DomainError
from randtime.sampling import sample_inverse, sample_inverse_batch, sample_path, shot_noise_for, stable_unit

ALL_SPECS = default_catalog()
ALL_IDS = [s.variant for s in ALL_SPECS]


def _within_3se(samples, expected):
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    assert abs(samples.mean() - expected) <= 3.0 * se


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------


def test_streams_reproducible_and_distinct():
    a = rng.stream(7, 0).random(4)
    np.testing.assert_array_equal(a, rng.stream(7, 0).random(4))
    assert not np.array_equal(a, rng.stream(7, 1).random(4))
    assert not np.array_equal(a, rng.stream(8, 0).random(4))


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, True, "3"])
def test_bad_seeds(seed):
    with pytest.raises(DomainError):
        rng.check_seed(seed)


def test_block_ranges_cover():
    blocks = rng.block_ranges(2 * rng.BLOCK_SIZE + 5)
    assert [b for b, _, _ in blocks] == [0, 1, 2]
    assert blocks[-1][2] == 2 * rng.BLOCK_SIZE + 5
    assert rng.block_ranges(0) == []


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------


def test_cpp_path_counts_arrivals():
    spec = CompoundPoisson(2.0, Deterministic(1.0))
    counts = np.array([sample_path(spec, 10.0, 1.0, seed).S[-1] for seed in range(10_000)])
    assert np.all(counts == np.round(counts))
    _within_3se(counts, 20.0)


def test_cpp_path_has_exact_jump_times():
    p = sample_path(CompoundPoisson(1.0, Exponential(1.0)), 5.0, 1.0, 3)
    assert p.exact_jump_times
    assert p.r[0] == 0.0 and p.S[0] == 0.0
    assert np.all(np.diff(p.S) > 0)


def test_half_stable_path_endpoint_is_levy():
    # S(1) for the 1/2-stable subordinator has CDF erfc(1 / (2 sqrt(x)))
    s1 = np.array([sample_path(AlphaStable(0.5), 1.0, 1.0, seed).S[-1] for seed in range(10_000)])
    ks = stats.kstest(s1, lambda x: erfc(1.0 / (2.0 * np.sqrt(x)))).statistic
    assert ks < 0.02


def test_stable_unit_laplace_transform():
    # E exp(-lam S) = exp(-lam^alpha)
    x = stable_unit(rng.stream(11, 0), 0.7, 200_000)
    for lam in (0.5, 1.0, 2.0):
        vals = np.exp(-lam * x)
        _within_3se(vals, math.exp(-(lam**0.7)))


def test_gamma_path_mean():
    ends = np.array([sample_path(Gamma(1.0, 1.0), 5.0, 0.5, seed).S[-1] for seed in range(10_000)])
    _within_3se(ends, 5.0)


@pytest.mark.parametrize("spec", [TruncatedStable(0.5, 1.0), ExpWeighted(0.5, 1.0)], ids=["TruncatedStable", "ExpWeighted"])
def test_finite_mean_path_means(spec):
    # E S(T) = T * int_0^inf k = T * K(0)
    T = 2.0
    ends = np.array([sample_path(spec, T, 0.5, seed).S[-1] for seed in range(4000)])
    _within_3se(ends, T * spec.K_at_zero)


@settings(max_examples=30, deadline=None)
@given(spec=st.sampled_from(ALL_SPECS), seed=st.integers(0, 2**64 - 1), T=st.floats(0.1, 5.0), h=st.floats(0.01, 1.0))
def test_path_invariants(spec, seed, T, h):
    p = sample_path(spec, T, h, seed)
    assert p.r[0] == 0.0 and p.S[0] == 0.0
    assert np.all(np.diff(p.r) > 0)
    assert np.all(np.diff(p.S) >= 0)
    assert p.r[-1] <= T * (1 + 1e-12)
    assert p.rng_seed == seed


def test_path_reproducible():
    a = sample_path(SumStable(0.3, 0.7), 3.0, 0.1, 99)
    b = sample_path(SumStable(0.3, 0.7), 3.0, 0.1, 99)
    np.testing.assert_array_equal(a.S, b.S)


def test_path_domain():
    with pytest.raises(DomainError):
        sample_path(Gamma(1.0, 1.0), 0.0, 0.1, 1)
    with pytest.raises(DomainError):
        sample_path(Gamma(1.0, 1.0), 1.0, -0.1, 1)


# ---------------------------------------------------------------------------
# inverse draws
# ---------------------------------------------------------------------------


def test_half_stable_inverse_mean():
    draws = sample_inverse_batch(AlphaStable(0.5), 1.0, 100_000, 2024)
    _within_3se(draws, 1.0 / gamma_fn(1.5))


@pytest.mark.parametrize("spec", ALL_SPECS, ids=ALL_IDS)
def test_inverse_at_zero(spec):
    assert sample_inverse(spec, 0.0, 5) == 0.0


def test_cpp_inverse_laplace_matches_series():
    spec = CompoundPoisson(1.0, Exponential(1.0))
    inp = CppBoundInput(rate=1.0, jumps=Exponential(1.0), c=1.0, beta=1.0)
    for t in (0.5, 2.0, 5.0):
        draws = sample_inverse_batch(spec, t, 100_000, 17)
        _within_3se(np.exp(-draws), inverse_cpp_laplace(inp, t))


def test_cpp_deterministic_passage_is_arrival():
    # unit jumps: E(t) is the ceil(t)-th arrival time, a Gamma(ceil(t), rate) variable
    spec = CompoundPoisson(2.0, Deterministic(1.0))
    draws = sample_inverse_batch(spec, 3.0, 50_000, 8)
    ks = stats.kstest(draws, stats.gamma(3, scale=0.5).cdf).statistic
    assert ks < 0.02


def test_half_stable_self_similarity():
    # E(t) / t^(1/2) is half-normal with scale sqrt(2)
    for t in (0.01, 1.0, 100.0):
        draws = sample_inverse_batch(AlphaStable(0.5), t, 10_000, 31) / math.sqrt(t)
        ks = stats.kstest(draws, lambda x: erf(x / 2.0)).statistic
        assert ks < 0.02


def test_stable_self_similarity_between_levels():
    spec = AlphaStable(0.7)
    a = sample_inverse_batch(spec, 1.0, 10_000, 1)
    b = sample_inverse_batch(spec, 50.0, 10_000, 2) / 50.0**0.7
    assert stats.ks_2samp(a, b).statistic < 0.02


@settings(max_examples=20, deadline=None)
@given(spec=st.sampled_from(ALL_SPECS), seed=st.integers(0, 2**32), ts=st.lists(st.floats(0.0, 20.0), min_size=2, max_size=6))
def test_inverse_monotone_in_level(spec, seed, ts):
    ts = np.sort(np.asarray(ts))
    draws = sample_inverse_batch(spec, ts, 8, seed)
    assert np.all(np.diff(draws, axis=1) >= 0)
    assert np.all(draws >= 0)


def test_inverse_prefix_stable():
    spec = Gamma(1.0, 1.0)
    a = sample_inverse_batch(spec, 2.0, 3000, 77)
    b = sample_inverse_batch(spec, 2.0, 1500, 77)
    np.testing.assert_array_equal(a[:1500], b)
    assert sample_inverse(spec, 2.0, 77) == a[0]


def test_inverse_domain():
    with pytest.raises(DomainError):
        sample_inverse_batch(Gamma(1.0, 1.0), -1.0, 10, 1)
    with pytest.raises(DomainError):
        sample_inverse_batch(Gamma(1.0, 1.0), 1.0, 0, 1)


def test_pareto_cpp_inverse_matches_series():
    spec = CompoundPoisson(1.0, Pareto(1.5, 1.0))
    inp = CppBoundInput(rate=1.0, jumps=Pareto(1.5, 1.0), c=1.0, beta=1.0)
    ref = inverse_cpp_laplace_detail(inp, 4.0)
    vals = np.exp(-sample_inverse_batch(spec, 4.0, 100_000, 3))
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - ref.value) <= 3.0 * se + ref.error_estimate


def test_shot_noise_rate_matches_budget():
    sn = shot_noise_for(Gamma(1.0, 1.0))
    assert sn.rate > 0 and sn.eps > 0 and sn.drift >= 0
    sizes = sn.sizes(rng.stream(1, 0).random(10_000))
    assert np.all(sizes >= sn.eps * (1 - 1e-9))
