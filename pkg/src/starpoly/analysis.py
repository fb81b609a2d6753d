"""Radius statistics, tail events, scaling-exponent regression, and the
probabilistic utilities behind them (Chernoff-style Bernoulli bound with an
exact binomial oracle, Gaussian exit-probability check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .paths import StarConfig, StarEnsemble, sample_ensembles_batch
from .sampler import ChainRecord, branch_suprema, lower_median
from .zbound import theorem_shape  # noqa: F401  (re-exported for reports)


@dataclass
class RadiusSample:
    """Per-branch running suprema and their lower median, with indicators of
    the small-radius and large-radius tail events."""

    suprema: np.ndarray
    median: float
    below_r1: bool | None = None
    above_r2: bool | None = None


def radius_median(ensemble: StarEnsemble, r1: float | None = None,
                  r2: float | None = None) -> RadiusSample:
    """Effective radius: lower median (ceil(N/2)-th smallest) of the branch
    suprema max_i |X^k_i| over all grid points."""
    sups = branch_suprema(ensemble.positions)
    med = lower_median(sups)
    return RadiusSample(
        suprema=sups, median=med,
        below_r1=None if r1 is None else bool(med <= r1),
        above_r2=None if r2 is None else bool(med >= r2),
    )


def tail_event_rates(radii: np.ndarray, r1: float, r2: float,
                     batches: int = 20) -> dict:
    """Empirical rates of {R <= r1} and {R >= r2} with batch-means standard
    errors (valid for correlated MCMC output as well as iid samples)."""
    if r1 < 0 or r2 < 0:
        raise ValueError("thresholds must be nonnegative")
    radii = np.asarray(radii, dtype=float)
    below = (radii <= r1).astype(float)
    above = (radii >= r2).astype(float)

    def batch_sigma(x):
        b = min(batches, len(x))
        means = np.array([chunk.mean() for chunk in np.array_split(x, b)])
        return float(np.std(means, ddof=1) / np.sqrt(b)) if b > 1 else float("nan")

    return {
        "rate_below": float(below.mean()), "sigma_below": batch_sigma(below),
        "rate_above": float(above.mean()), "sigma_above": batch_sigma(above),
        "n": len(radii),
    }


@dataclass
class ExponentFit:
    """OLS fit of log(radius) on log(horizon)."""

    horizons: np.ndarray
    radii: np.ndarray
    slope: float
    intercept: float
    residual: float
    half_width: float  # 95% confidence half-width of the slope


def exponent_fit(horizons, radii) -> ExponentFit:
    """Least-squares scaling exponent from (T_j, R_j) pairs on log-log axes."""
    T = np.asarray(horizons, dtype=float)
    R = np.asarray(radii, dtype=float)
    if len(T) < 3:
        raise ValueError("need at least three sweep points")
    if np.any(np.diff(T) <= 0):
        raise ValueError("horizons must be strictly increasing")
    if np.any(T <= 0) or np.any(R <= 0):
        raise ValueError("horizons and radii must be positive")
    x, y = np.log(T), np.log(R)
    res = stats.linregress(x, y)
    fitted = res.intercept + res.slope * x
    rss = float(np.sum((y - fitted) ** 2))
    dof = len(T) - 2
    half = float(stats.t.ppf(0.975, dof) * res.stderr) if dof > 0 else float("inf")
    return ExponentFit(T, R, float(res.slope), float(res.intercept), rss, half)


def predicted_radius_band(d: int, beta: float, N: int, T: float,
                          c_low: float = 1.0, c_high: float = 1.0) -> tuple[float, float]:
    """Theoretical radius band (low, high) up to the caller-supplied constants.

    d=1: both ends scale as beta^(1/3) N^(1/3) T.
    d=2: beta^(1/4) N^(1/4) T^(3/4) times (log beta T)^(-1/2) and ^(1/2).
    d=3: low beta^(1/6) N^(1/6) T^(1/2) (log beta T)^(-1/3),
         high beta^(1/4) N^(1/4) T^(3/4) (log beta T)^(1/2).
    """
    if d == 1:
        base = beta ** (1 / 3) * N ** (1 / 3) * T
        return c_low * base, c_high * base
    lg = np.log(beta * T)
    if lg <= 0:
        raise ValueError("band degenerate: log(beta*T) must be positive")
    if d == 2:
        base = beta**0.25 * N**0.25 * T**0.75
        return c_low * base * lg**-0.5, c_high * base * lg**0.5
    if d == 3:
        low = beta ** (1 / 6) * N ** (1 / 6) * T**0.5 * lg ** (-1 / 3)
        high = beta**0.25 * N**0.25 * T**0.75 * lg**0.5
        return c_low * low, c_high * high
    raise ValueError(f"unsupported dimension {d!r}")


def band_hypothesis_ok(d: int, beta: float, N: int, T: float) -> bool:
    """The regime in which the radius band is proven (up to the unknown
    constants): d=1 needs beta, N >= 1; d=2,3 additionally T <= N."""
    if d == 1:
        return beta >= 1 and N >= 1
    if d in (2, 3):
        return beta >= 1 and N >= 1 and T <= N
    return False


def physical_radius_midband(beta: float, N: int, T: float) -> float:
    """The d=3 physics prediction beta^(1/5) N^(1/5) T^(3/5), reported as a
    mid-band reference between the proven ends."""
    return beta**0.2 * N**0.2 * T**0.6


def bernoulli_ld_bound(n: int, p: float, alpha: float) -> float:
    """Chernoff upper bound on P(S_n > alpha n) for iid Bernoulli(p) trials:
    ((1-alpha) p / (alpha q))^(alpha n) * (q + p alpha q / ((1-alpha) p))^n,
    q = 1 - p, valid for alpha in (p, 1)."""
    if not 0 < p < 1:
        raise ValueError("success probability must lie in (0, 1)")
    if not p < alpha < 1:
        raise ValueError("threshold must lie in (p, 1)")
    q = 1.0 - p
    ratio = (1.0 - alpha) * p / (alpha * q)
    # evaluate in logs for stability at large n
    log_bound = alpha * n * math.log(ratio) + n * math.log(q + alpha * q / (1.0 - alpha))
    return math.exp(log_bound)


def exact_binomial_tail(n: int, p: float, alpha: float) -> float:
    """P(S_n > alpha n) by direct summation with log binomial coefficients."""
    if n > 1000:
        raise ValueError("summation oracle limited to n <= 1000")
    if not 0 < p < 1:
        raise ValueError("success probability must lie in (0, 1)")
    if alpha >= 1:
        return 0.0
    k_min = math.floor(alpha * n) + 1
    if k_min > n:
        return 0.0
    logp, logq = math.log(p), math.log(1.0 - p)
    total = 0.0
    for k in range(max(k_min, 0), n + 1):
        log_term = (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
                    + k * logp + (n - k) * logq)
        total += math.exp(log_term)
    return min(total, 1.0)


def exit_prob_bound_check(r: float, T: float, n_samples: int, n_steps: int,
                          rng: np.random.Generator) -> dict:
    """d=1 sanity check of the Gaussian exit estimate: the Monte Carlo rate of
    max_i |X_i| > r must not exceed the reflection/union bound 4*Phi_bar(r/sqrt T);
    also fits the constant in the (C/r) exp(-r^2/(2T)) shape."""
    if r * r / T < 1:
        raise ValueError("check intended for the regime r^2/T >= 1")
    config = StarConfig(d=1, N=1, T=T, beta=0.0, n=n_steps)
    hits = 0
    done = 0
    chunk = max(1, int(2e7 // max(1, n_steps)))
    while done < n_samples:
        b = min(chunk, n_samples - done)
        positions = sample_ensembles_batch(config, b, rng)
        sups = np.abs(positions[:, 0, :, 0]).max(axis=1)
        hits += int((sups > r).sum())
        done += b
    empirical = hits / n_samples
    reflection = 4.0 * stats.norm.sf(r / math.sqrt(T))
    fitted_c = empirical * r * math.exp(r * r / (2.0 * T))
    return {
        "empirical": empirical,
        "empirical_sigma": math.sqrt(max(empirical * (1 - empirical), 1e-12) / n_samples),
        "reflection_bound": float(reflection),
        "fitted_c": fitted_c,
        "passed": empirical <= reflection,
    }


def records_radius_series(records: list[ChainRecord]) -> np.ndarray:
    return np.array([rec.radius_median for rec in records])
