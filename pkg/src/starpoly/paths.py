"""Discretized Brownian branches, bridge resampling, drifted (tilted) branches,
and exact discrete likelihood ratios for the change of measure.

The tilt gives branch k a deterministic radial drift of accumulated size
kappa * t^(alpha+1) in direction theta_k.  We work with exact per-step
accumulated-drift increments kappa*(t_{i+1}^{a+1} - t_i^{a+1}) rather than
point values of the drift rate, which is singular at t=0 for alpha<0; this
keeps the discrete Girsanov identity exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ball_volume, uniform_sphere_directions


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, T] with n steps of size dt = T/n."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.n_steps < 1:
            raise ValueError("need at least one step")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True)
class StarConfig:
    """Global model parameters: dimension, branch count, horizon, penalty, steps."""

    d: int
    N: int
    T: float
    beta: float
    n: int

    def __post_init__(self):
        ball_volume(self.d)
        if self.N < 1:
            raise ValueError("need at least one branch")
        if self.T <= 0:
            raise ValueError("horizon must be positive")
        if self.beta < 0:
            raise ValueError("penalty must be nonnegative")
        if self.n < 1:
            raise ValueError("need at least one step")

    def grid(self) -> TimeGrid:
        return TimeGrid(self.T, self.n)


@dataclass
class BranchPath:
    """One discretized branch: n+1 positions in R^d starting at the origin."""

    grid: TimeGrid
    positions: np.ndarray  # (n+1, d)

    def __post_init__(self):
        if self.positions.shape[0] != self.grid.n_steps + 1:
            raise ValueError("position count does not match grid")
        if np.any(self.positions[0] != 0.0):
            raise ValueError("branch must start at the origin")


@dataclass
class StarEnsemble:
    """N branches on a shared grid, stored as one (N, n+1, d) array."""

    config: StarConfig
    positions: np.ndarray  # (N, n+1, d)

    def __post_init__(self):
        N, npts, d = self.positions.shape
        if N != self.config.N or npts != self.config.n + 1 or d != self.config.d:
            raise ValueError("position array shape does not match config")
        if np.any(self.positions[:, 0, :] != 0.0):
            raise ValueError("branches must start at the origin")

    def branch(self, k: int) -> BranchPath:
        return BranchPath(self.config.grid(), self.positions[k])


def drift_params_for(d: int, beta: float, N: int) -> tuple[float, float]:
    """Drift scale kappa and exponent alpha used for the tilted measure.

    d=1: (beta^(1/3) N^(1/3), 0); d=2,3: (beta^(1/4) N^(1/4), -1/4).
    """
    ball_volume(d)
    if d == 1:
        return (beta * N) ** (1.0 / 3.0), 0.0
    return (beta * N) ** 0.25, -0.25


@dataclass
class TiltParams:
    """Per-branch drift: direction theta_k, scale kappa, exponent alpha.

    mean_shifts[k, i] is the exact mean displacement added to increment i of
    branch k: theta_k * kappa * (t_{i+1}^(a+1) - t_i^(a+1)).
    """

    grid: TimeGrid
    kappa: float
    alpha: float
    directions: np.ndarray  # (N, d), unit rows
    mean_shifts: np.ndarray = field(init=False)  # (N, n, d)

    def __post_init__(self):
        if self.alpha <= -0.5:
            raise ValueError("drift exponent must exceed -1/2")
        norms = np.linalg.norm(self.directions, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ValueError("drift directions must be unit vectors")
        t = self.grid.times
        increments = self.kappa * np.diff(t ** (self.alpha + 1.0))  # (n,)
        self.mean_shifts = increments[None, :, None] * self.directions[:, None, :]

    @property
    def n_branches(self) -> int:
        return self.directions.shape[0]


def make_tilt(config: StarConfig, rng: np.random.Generator,
              kappa: float | None = None, alpha: float | None = None) -> TiltParams:
    """Sample drift directions and package the tilt for a configuration."""
    k0, a0 = drift_params_for(config.d, config.beta, config.N)
    if kappa is None:
        kappa = k0
    if alpha is None:
        alpha = a0
    directions = uniform_sphere_directions(config.d, config.N, rng)
    return TiltParams(config.grid(), kappa, alpha, directions)


def zero_tilt(config: StarConfig) -> TiltParams:
    """Driftless tilt (kappa=0); useful as a neutral reference."""
    directions = np.zeros((config.N, config.d))
    directions[:, 0] = 1.0
    return TiltParams(config.grid(), 0.0, 0.0, directions)


def sample_brownian(grid: TimeGrid, d: int, rng: np.random.Generator) -> BranchPath:
    """One driftless branch: iid Gaussian increments with covariance dt*I."""
    steps = rng.standard_normal((grid.n_steps, d)) * np.sqrt(grid.dt)
    positions = np.vstack([np.zeros((1, d)), np.cumsum(steps, axis=0)])
    return BranchPath(grid, positions)


def sample_tilted(grid: TimeGrid, d: int, tilt: TiltParams, k: int,
                  rng: np.random.Generator) -> BranchPath:
    """One branch under the tilted law: increment i has mean mean_shifts[k, i]."""
    if tilt.grid != grid:
        raise ValueError("tilt grid does not match")
    steps = rng.standard_normal((grid.n_steps, d)) * np.sqrt(grid.dt)
    steps += tilt.mean_shifts[k]
    positions = np.vstack([np.zeros((1, d)), np.cumsum(steps, axis=0)])
    return BranchPath(grid, positions)


def sample_ensemble(config: StarConfig, rng: np.random.Generator,
                    tilt: TiltParams | None = None) -> StarEnsemble:
    """All N branches at once, driftless or tilted."""
    grid = config.grid()
    steps = rng.standard_normal((config.N, config.n, config.d)) * np.sqrt(grid.dt)
    if tilt is not None:
        if tilt.grid != grid:
            raise ValueError("tilt grid does not match")
        steps += tilt.mean_shifts
    positions = np.concatenate(
        [np.zeros((config.N, 1, config.d)), np.cumsum(steps, axis=1)], axis=1)
    return StarEnsemble(config, positions)


def sample_ensembles_batch(config: StarConfig, batch: int, rng: np.random.Generator,
                           mean_shifts: np.ndarray | None = None) -> np.ndarray:
    """(batch, N, n+1, d) positions; mean_shifts may be (N,n,d) or (batch,N,n,d)."""
    grid = config.grid()
    steps = rng.standard_normal((batch, config.N, config.n, config.d)) * np.sqrt(grid.dt)
    if mean_shifts is not None:
        steps += mean_shifts
    return np.concatenate(
        [np.zeros((batch, config.N, 1, config.d)), np.cumsum(steps, axis=2)], axis=2)


def bridge_resample(path: BranchPath, i: int, j: int,
                    rng: np.random.Generator) -> BranchPath:
    """Redraw positions strictly between indices i and j from the Wiener
    conditional law given the retained points.

    If j == n the segment (i, n] is redrawn as a free Brownian continuation
    from position i; otherwise the interior (i, j) is a Brownian bridge
    between positions i and j.  Positions outside (i, j) are unchanged.
    """
    n = path.grid.n_steps
    if not (0 <= i < j <= n):
        raise ValueError(f"invalid segment indices ({i}, {j})")
    new = path.positions.copy()
    if j == n:
        free = sample_segment_free(new[i], j - i, path.grid.dt,
                                   path.positions.shape[1], rng)
        new[i + 1:] = free
    else:
        interior = sample_segment_bridge(new[i], new[j], j - i, path.grid.dt,
                                         path.positions.shape[1], rng)
        new[i + 1:j] = interior
    return BranchPath(path.grid, new)


def sample_segment_free(start: np.ndarray, steps: int, dt: float, d: int,
                        rng: np.random.Generator) -> np.ndarray:
    """(steps, d) free Brownian continuation from start (start excluded)."""
    inc = rng.standard_normal((steps, d)) * np.sqrt(dt)
    return start + np.cumsum(inc, axis=0)


def sample_segment_bridge(start: np.ndarray, end: np.ndarray, steps: int,
                          dt: float, d: int, rng: np.random.Generator) -> np.ndarray:
    """(steps-1, d) interior points of a Brownian bridge from start to end
    over `steps` uniform steps.  Sequential conditioning: given the current
    point x with m steps remaining to the pinned endpoint, the next point is
    N(x + (end - x)/m, dt*(m-1)/m * I).
    """
    out = np.empty((steps - 1, d))
    x = start
    for idx in range(steps - 1):
        m = steps - idx  # steps remaining to the endpoint
        mean = x + (end - x) / m
        var = dt * (m - 1) / m
        x = mean + rng.standard_normal(d) * np.sqrt(var)
        out[idx] = x
    return out


def log_likelihood_ratio(path: BranchPath, tilt: TiltParams, k: int) -> float:
    """Exact log density ratio of the tilted to the driftless discrete path law
    for branch k: sum_i [mu_i . dX_i / dt - |mu_i|^2 / (2 dt)].
    """
    if tilt.grid != path.grid:
        raise ValueError("path and tilt grids do not match")
    dt = path.grid.dt
    dx = np.diff(path.positions, axis=0)  # (n, d)
    mu = tilt.mean_shifts[k]
    return float(np.sum(mu * dx) / dt - np.sum(mu * mu) / (2.0 * dt))


def log_likelihood_ratio_batch(positions: np.ndarray, tilt: TiltParams) -> np.ndarray:
    """Log ratio summed over branches for a (batch, N, n+1, d) position array."""
    dt = tilt.grid.dt
    dx = np.diff(positions, axis=2)  # (batch, N, n, d)
    mu = tilt.mean_shifts  # (N, n, d)
    lin = np.einsum("bknd,knd->b", dx, mu) / dt
    quad = np.sum(mu * mu) / (2.0 * dt)
    return lin - quad


def kl_tilted(tilt: TiltParams) -> float:
    """Exact KL divergence of the tilted discrete law from the driftless law:
    sum_k sum_i |mu_{k,i}|^2 / (2 dt).  Nonnegative; converges as n grows to
    N * kappa^2 (alpha+1)^2 T^(2 alpha + 1) / (2 (2 alpha + 1)).
    """
    dt = tilt.grid.dt
    return float(np.sum(tilt.mean_shifts**2) / (2.0 * dt))


def kl_tilted_limit(kappa: float, alpha: float, N: int, T: float) -> float:
    """Continuum limit of kl_tilted."""
    return N * kappa**2 * (alpha + 1.0) ** 2 * T ** (2 * alpha + 1) / (2.0 * (2 * alpha + 1))
