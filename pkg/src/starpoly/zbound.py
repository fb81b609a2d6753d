"""Lower bounds and unbiased estimates for the log normalizer.

Jensen route: log Z >= -beta * E_tilted[energy] - KL(tilted || driftless).
Unbiased route: Z = E_tilted[exp(-beta * energy) / W] with W the exact
discrete likelihood ratio; the log of the sample mean estimates log Z.
Drift directions are resampled independently per replicate (recorded), which
realizes the product of the direction ensemble with the path law.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .energy import energy_brute_batch, energy_cells
from .paths import (StarConfig, StarEnsemble, TiltParams, kl_tilted,
                    log_likelihood_ratio_batch, make_tilt,
                    sample_ensembles_batch)
from .geometry import uniform_sphere_directions

#: largest N*n for which the fully vectorized batch path is used
_BATCH_POINT_BUDGET = 4096


@dataclass
class ZEstimate:
    """Estimates of log Z and the Jensen lower bound with standard errors."""

    jensen_lower: float | None = None
    jensen_sigma: float | None = None
    unbiased_log: float | None = None
    unbiased_sigma: float | None = None
    reference_log: float | None = None
    reference_sigma: float | None = None
    kl: float | None = None
    kappa: float | None = None
    alpha: float | None = None
    n_samples: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _tilted_batches(config: StarConfig, n_samples: int, rng: np.random.Generator,
                    tilt: TiltParams, resample_theta: bool, chunk: int):
    """Yield (positions, mean_shifts) batches under the tilted law."""
    done = 0
    base_inc = tilt.mean_shifts  # (N, n, d); magnitudes shared by any theta
    inc_norm = np.linalg.norm(base_inc, axis=2)  # (N, n) since rows are theta*scalar
    while done < n_samples:
        b = min(chunk, n_samples - done)
        if resample_theta and config.d >= 2 and tilt.kappa != 0.0:
            theta = np.stack([uniform_sphere_directions(config.d, config.N, rng)
                              for _ in range(b)])  # (b, N, d)
            shifts = inc_norm[None, :, :, None] * theta[:, :, None, :]
        else:
            shifts = np.broadcast_to(base_inc, (b,) + base_inc.shape)
        positions = sample_ensembles_batch(config, b, rng, mean_shifts=shifts)
        yield positions, shifts
        done += b


def _batch_log_ratio(positions: np.ndarray, shifts: np.ndarray, dt: float) -> np.ndarray:
    dx = np.diff(positions, axis=2)
    lin = np.einsum("bknd,bknd->b", dx, shifts) / dt
    quad = np.einsum("bknd,bknd->b", shifts, shifts) / (2.0 * dt)
    return lin - quad


def _energy_totals(config: StarConfig, positions: np.ndarray) -> np.ndarray:
    dt = config.grid().dt
    if config.N * config.n <= _BATCH_POINT_BUDGET:
        tot, _, _ = energy_brute_batch(positions, config.d, dt)
        return tot
    out = np.empty(positions.shape[0])
    for b in range(positions.shape[0]):
        out[b] = energy_cells(StarEnsemble(config, positions[b])).total
    return out


def _chunk_size(config: StarConfig) -> int:
    P = config.N * config.n
    return max(1, int(4e6 // max(1, P * P)))


def jensen_lower_bound(config: StarConfig, n_samples: int, rng: np.random.Generator,
                       tilt: TiltParams | None = None,
                       resample_theta: bool = True) -> ZEstimate:
    """Estimate -beta * E_tilted[energy] - KL with a propagated standard error."""
    if tilt is None:
        tilt = make_tilt(config, rng)
    kl = kl_tilted(tilt)
    s = 0.0
    s2 = 0.0
    for positions, _ in _tilted_batches(config, n_samples, rng, tilt,
                                        resample_theta, _chunk_size(config)):
        tot = _energy_totals(config, positions)
        s += float(tot.sum())
        s2 += float((tot * tot).sum())
    mean_e = s / n_samples
    var_e = max(0.0, s2 / n_samples - mean_e**2)
    sigma_e = np.sqrt(var_e / n_samples)
    return ZEstimate(
        jensen_lower=-config.beta * mean_e - kl,
        jensen_sigma=config.beta * sigma_e,
        kl=kl, kappa=tilt.kappa, alpha=tilt.alpha, n_samples=n_samples,
    )


def _log_mean_exp(a: np.ndarray) -> tuple[float, float]:
    """log of the sample mean of exp(a), with a delta-method standard error."""
    m = float(a.max())
    e = np.exp(a - m)
    mean = float(e.mean())
    if mean == 0.0:
        raise FloatingPointError("all weights underflowed to zero")
    sigma = float(np.std(e) / (np.sqrt(len(a)) * mean))
    return m + float(np.log(mean)), sigma


def unbiased_log_z(config: StarConfig, n_samples: int, rng: np.random.Generator,
                   tilt: TiltParams | None = None,
                   resample_theta: bool = True) -> ZEstimate:
    """log of the importance-sampled unbiased estimate of the normalizer:
    mean over tilted draws of exp(-beta * energy - log W)."""
    if tilt is None:
        tilt = make_tilt(config, rng)
    dt = config.grid().dt
    exponents = []
    for positions, shifts in _tilted_batches(config, n_samples, rng, tilt,
                                             resample_theta, _chunk_size(config)):
        tot = _energy_totals(config, positions)
        logw = _batch_log_ratio(positions, shifts, dt)
        exponents.append(-config.beta * tot - logw)
    a = np.concatenate(exponents)
    log_est, sigma = _log_mean_exp(a)
    return ZEstimate(
        unbiased_log=log_est, unbiased_sigma=sigma,
        kl=kl_tilted(tilt), kappa=tilt.kappa, alpha=tilt.alpha,
        n_samples=n_samples,
    )


def reference_log_z(config: StarConfig, n_samples: int,
                    rng: np.random.Generator) -> ZEstimate:
    """log of the plain Monte Carlo mean of exp(-beta * energy) under the
    driftless law; feasible on small instances only."""
    exponents = []
    done = 0
    chunk = _chunk_size(config)
    while done < n_samples:
        b = min(chunk, n_samples - done)
        positions = sample_ensembles_batch(config, b, rng)
        tot = _energy_totals(config, positions)
        exponents.append(-config.beta * tot)
        done += b
    a = np.concatenate(exponents)
    log_est, sigma = _log_mean_exp(a)
    return ZEstimate(reference_log=log_est, reference_sigma=sigma,
                     kappa=0.0, alpha=0.0, n_samples=n_samples)


def estimate_z(config: StarConfig, n_samples: int, rng: np.random.Generator,
               resample_theta: bool = True,
               with_reference: bool | None = None) -> ZEstimate:
    """All three estimates in one record (reference only on small instances)."""
    tilt = make_tilt(config, rng)
    jl = jensen_lower_bound(config, n_samples, rng, tilt, resample_theta)
    ub = unbiased_log_z(config, n_samples, rng, tilt, resample_theta)
    est = ZEstimate(
        jensen_lower=jl.jensen_lower, jensen_sigma=jl.jensen_sigma,
        unbiased_log=ub.unbiased_log, unbiased_sigma=ub.unbiased_sigma,
        kl=jl.kl, kappa=tilt.kappa, alpha=tilt.alpha, n_samples=n_samples,
    )
    if with_reference is None:
        with_reference = config.N * config.n <= _BATCH_POINT_BUDGET
    if with_reference:
        ref = reference_log_z(config, n_samples, rng)
        est.reference_log = ref.reference_log
        est.reference_sigma = ref.reference_sigma
    return est


def theorem_shape(d: int, beta: float, N: int, T: float) -> float:
    """The proven order of -log Z: beta^(2/3) N^(5/3) T in d=1 and
    beta^(1/2) N^(3/2) T^(1/2) log(beta T) in d=2,3."""
    if d == 1:
        return beta ** (2.0 / 3.0) * N ** (5.0 / 3.0) * T
    if d in (2, 3):
        return beta**0.5 * N**1.5 * T**0.5 * np.log(beta * T)
    raise ValueError(f"unsupported dimension {d!r}")


def shape_in_hypothesis(d: int, beta: float, N: int, T: float) -> bool:
    """Whether (beta, N, T) lies in the proven regime; outside it the shape is
    an extrapolation and callers should flag it."""
    if d == 1:
        return beta >= 1 and T >= 1
    if d in (2, 3):
        return beta >= 1 and 1 <= T <= N
    return False


def fit_shape_constant(shapes: np.ndarray, neg_jensen: np.ndarray) -> float:
    """Least-squares constant C in -jensen_lower ~= C * shape over a sweep."""
    shapes = np.asarray(shapes, dtype=float)
    neg_jensen = np.asarray(neg_jensen, dtype=float)
    denom = float(np.sum(shapes * shapes))
    if denom == 0.0:
        raise ValueError("degenerate sweep: all shape values are zero")
    return float(np.sum(shapes * neg_jensen) / denom)
