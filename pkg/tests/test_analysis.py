"""Radius statistics, tail events, scaling fits, the Bernoulli large-deviation
bound against the exact binomial tail, and the Gaussian exit check."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from starpoly.analysis import (band_hypothesis_ok, bernoulli_ld_bound,
                               exact_binomial_tail, exit_prob_bound_check,
                               exponent_fit, physical_radius_midband,
                               predicted_radius_band, radius_median,
                               tail_event_rates)
from starpoly.paths import StarConfig, StarEnsemble


def test_radius_median_examples():
    cfg = StarConfig(d=1, N=3, T=1.0, beta=0.0, n=4)
    pos = np.zeros((3, 5, 1))
    pos[0, :, 0] = [0, 1, 0.5, 0.2, 0]      # sup 1
    pos[1, :, 0] = [0, -5, 0, 0, 0]         # sup 5
    pos[2, :, 0] = [0, 2, 9, 1, 0]          # sup 9
    sample = radius_median(StarEnsemble(cfg, pos), r1=2.0, r2=7.0)
    assert sample.median == 5.0
    assert not sample.below_r1
    assert sample.above_r2 is False


def test_radius_median_even_count_uses_lower():
    cfg = StarConfig(d=1, N=4, T=1.0, beta=0.0, n=1)
    pos = np.zeros((4, 2, 1))
    pos[:, 1, 0] = [9.0, 1.0, 2.0, 8.0]
    assert radius_median(StarEnsemble(cfg, pos)).median == 2.0


@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=15),
       st.floats(0.01, 100.0))
@settings(max_examples=100, deadline=None)
def test_median_event_duality(sups, r):
    # {lower median <= r} iff at least ceil(N/2) branch suprema are <= r
    from starpoly.sampler import lower_median
    sups = np.array(sups)
    med = lower_median(sups)
    k = (len(sups) + 1) // 2
    assert (med <= r) == (np.sum(sups <= r) >= k)


def test_tail_event_rates():
    radii = np.array([0.1, 0.2, 0.9, 1.5, 2.5, 3.0])
    out = tail_event_rates(radii, r1=0.5, r2=2.0, batches=3)
    assert out["rate_below"] == pytest.approx(2 / 6)
    assert out["rate_above"] == pytest.approx(2 / 6)
    assert out["n"] == 6
    with pytest.raises(ValueError):
        tail_event_rates(radii, r1=-1.0, r2=2.0)


def test_exponent_fit_recovers_planted_slope():
    T = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    R = 1.7 * T**0.75
    fit = exponent_fit(T, R)
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(1.7), abs=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-20)
    # and with multiplicative noise the CI covers the truth
    rng = np.random.default_rng(5)
    noisy = exponent_fit(T, R * np.exp(rng.normal(0, 0.05, T.size)))
    assert abs(noisy.slope - 0.75) < noisy.half_width + 0.2


def test_exponent_fit_validation():
    with pytest.raises(ValueError):
        exponent_fit([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        exponent_fit([1.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        exponent_fit([1.0, 2.0, 4.0], [1.0, -2.0, 3.0])


def test_predicted_band_exponents():
    # ratios across a doubling of T expose the pure power parts
    lo1, hi1 = predicted_radius_band(1, 2.0, 4, 1.0)
    lo2, hi2 = predicted_radius_band(1, 2.0, 4, 2.0)
    assert hi2 / hi1 == pytest.approx(2.0)
    assert lo1 == hi1  # d=1 band is a single power law up to constants
    lo, hi = predicted_radius_band(2, 4.0, 8, 2.0)
    base = 4.0**0.25 * 8.0**0.25 * 2.0**0.75
    lg = np.log(8.0)
    assert lo == pytest.approx(base / np.sqrt(lg))
    assert hi == pytest.approx(base * np.sqrt(lg))
    with pytest.raises(ValueError):
        predicted_radius_band(2, 1.0, 4, 1.0)  # log(beta T) = 0


def test_d3_midband_sits_between_proven_ends():
    # physics prediction lies inside the proven band (unit constants) once
    # the horizon is moderately large
    for T in (3.0, 5.0, 10.0, 50.0):
        for beta in (1.5, 4.0):
            for N in (2, 8):
                lo, hi = predicted_radius_band(3, beta, N, T)
                mid = physical_radius_midband(beta, N, T)
                assert lo < mid < hi


def test_band_hypothesis():
    assert band_hypothesis_ok(1, 1.0, 1, 100.0)
    assert not band_hypothesis_ok(1, 0.5, 1, 1.0)
    assert band_hypothesis_ok(2, 4.0, 8, 8.0)
    assert not band_hypothesis_ok(2, 4.0, 8, 9.0)


def test_ld_bound_values():
    # frozen reference values for (n, p, alpha) = (10, 0.25, 0.5)
    assert bernoulli_ld_bound(10, 0.25, 0.5) == pytest.approx(0.23737, abs=1e-4)
    assert exact_binomial_tail(10, 0.25, 0.5) == pytest.approx(0.019728, abs=1e-5)
    with pytest.raises(ValueError):
        bernoulli_ld_bound(10, 0.6, 0.5)
    with pytest.raises(ValueError):
        exact_binomial_tail(2000, 0.25, 0.5)


def test_ld_bound_dominates_exact_tail():
    for n in range(1, 61):
        for p in np.arange(0.05, 0.46, 0.05):
            bound = bernoulli_ld_bound(n, float(p), 0.5)
            tail = exact_binomial_tail(n, float(p), 0.5)
            assert bound >= tail, (n, p)


def test_ld_bound_majorized_by_four_p_power():
    for n in range(1, 61):
        for p in np.arange(0.05, 0.50, 0.05):
            assert bernoulli_ld_bound(n, float(p), 0.5) <= (4.0 * p) ** (n / 2) \
                * (1 + 1e-12), (n, p)


def test_exact_tail_against_scipy():
    for n, p, alpha in ((17, 0.3, 0.5), (60, 0.1, 0.4), (5, 0.45, 0.5)):
        k = math.floor(alpha * n)
        assert exact_binomial_tail(n, p, alpha) == pytest.approx(
            float(stats.binom.sf(k, n, p)), rel=1e-10)


def test_exit_prob_bound_check():
    out = exit_prob_bound_check(3.0, 1.0, 200_000, 64, np.random.default_rng(9))
    assert out["passed"]
    assert out["empirical"] <= out["reflection_bound"]
    # the fitted constant in (C/r) exp(-r^2/2T) should be order one
    assert 0.1 < out["fitted_c"] < 10.0
    with pytest.raises(ValueError):
        exit_prob_bound_check(0.5, 1.0, 100, 16, np.random.default_rng(0))
