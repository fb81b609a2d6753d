"""Log-normalizer estimates: Jensen bound, unbiased importance estimate,
plain reference estimate, and the theorem shape helpers."""

import numpy as np
import pytest

from starpoly.paths import StarConfig, make_tilt, zero_tilt
from starpoly.zbound import (estimate_z, fit_shape_constant,
                             jensen_lower_bound, reference_log_z,
                             shape_in_hypothesis, theorem_shape,
                             unbiased_log_z)


def test_beta_zero_log_z_is_zero():
    # Z = E[exp(0)] = 1, so every estimator must report log Z = 0-ish
    cfg = StarConfig(d=2, N=2, T=1.0, beta=0.0, n=16)
    rng = np.random.default_rng(1)
    ref = reference_log_z(cfg, 2_000, rng)
    assert ref.reference_log == 0.0
    ub = unbiased_log_z(cfg, 2_000, rng, tilt=zero_tilt(cfg))
    assert ub.unbiased_log == pytest.approx(0.0, abs=1e-12)
    jl = jensen_lower_bound(cfg, 2_000, rng, tilt=zero_tilt(cfg))
    assert jl.jensen_lower == 0.0
    assert jl.kl == 0.0


def test_beta_zero_with_drift_gives_minus_kl():
    # with beta=0 the Jensen bound collapses to -KL exactly
    cfg = StarConfig(d=2, N=3, T=1.0, beta=0.0, n=32)
    rng = np.random.default_rng(2)
    tilt = make_tilt(cfg, rng, kappa=1.0, alpha=-0.25)
    jl = jensen_lower_bound(cfg, 500, rng, tilt=tilt)
    assert jl.jensen_lower == pytest.approx(-jl.kl)
    assert jl.kl > 0


def test_unbiased_consistent_with_reference():
    # two independent estimators of the same log Z on a small instance
    cfg = StarConfig(d=1, N=2, T=1.0, beta=0.5, n=16)
    rng = np.random.default_rng(3)
    ub = unbiased_log_z(cfg, 20_000, rng)
    ref = reference_log_z(cfg, 20_000, rng)
    gap = abs(ub.unbiased_log - ref.reference_log)
    assert gap < 4.0 * np.hypot(ub.unbiased_sigma, ref.reference_sigma)


def test_jensen_below_unbiased():
    cfg = StarConfig(d=2, N=2, T=1.0, beta=1.0, n=32)
    est = estimate_z(cfg, 5_000, np.random.default_rng(4))
    assert est.jensen_lower <= est.unbiased_log + 3.0 * est.unbiased_sigma
    assert est.reference_log is not None  # small instance gets the reference
    assert est.jensen_lower <= est.reference_log + 3.0 * est.reference_sigma


def test_theorem_shape_values():
    assert theorem_shape(1, 1.0, 1, 1.0) == pytest.approx(1.0)
    assert theorem_shape(1, 8.0, 2, 3.0) == pytest.approx(4.0 * 2**(5 / 3) * 3.0)
    # d=2: beta^(1/2) N^(3/2) T^(1/2) log(beta T)
    assert theorem_shape(2, 1.0, 4, 4.0) == pytest.approx(
        8.0 * 2.0 * np.log(4.0))
    assert theorem_shape(2, 1.0, 4, 4.0) == pytest.approx(22.1807, abs=1e-3)
    assert theorem_shape(3, 1.0, 1, 1.0) == 0.0  # log(1) edge of the regime
    with pytest.raises(ValueError):
        theorem_shape(4, 1.0, 1, 1.0)


def test_theorem_shape_monotone_in_each_parameter():
    base = (2, 2.0, 4, 2.0)
    b = theorem_shape(*base)
    assert theorem_shape(2, 4.0, 4, 2.0) > b
    assert theorem_shape(2, 2.0, 8, 2.0) > b
    assert theorem_shape(2, 2.0, 4, 4.0) > b


def test_shape_in_hypothesis():
    assert shape_in_hypothesis(1, 1.0, 1, 5.0)
    assert not shape_in_hypothesis(1, 0.5, 1, 1.0)
    assert shape_in_hypothesis(2, 1.0, 4, 3.0)   # T <= N
    assert not shape_in_hypothesis(2, 1.0, 4, 8.0)
    assert not shape_in_hypothesis(3, 1.0, 4, 0.5)


def test_fit_shape_constant():
    shapes = np.array([1.0, 2.0, 4.0])
    assert fit_shape_constant(shapes, 3.0 * shapes) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        fit_shape_constant(np.zeros(3), np.ones(3))


def test_resample_theta_records_same_kl():
    # per-replicate direction resampling changes samples, not the divergence
    cfg = StarConfig(d=3, N=4, T=1.0, beta=1.0, n=32)
    a = jensen_lower_bound(cfg, 1_000, np.random.default_rng(7), resample_theta=True)
    b = jensen_lower_bound(cfg, 1_000, np.random.default_rng(7), resample_theta=False)
    assert a.kl == pytest.approx(b.kl)
    assert abs(a.jensen_lower - b.jensen_lower) < 5.0 * np.hypot(
        a.jensen_sigma, b.jensen_sigma)
