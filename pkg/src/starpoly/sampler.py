"""Metropolis sampling of the penalized path measure, plus a naive weighted
oracle for small instances.

Proposals redraw part of one branch from the Wiener conditional law given the
retained points, so the proposal is symmetric with respect to the reference
measure and the acceptance probability reduces to min(1, exp(-beta * dE)).
The cached energy is updated incrementally through the cell index restricted
to the modified branch segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import (CellIndex, EnergyBreakdown, energy_brute_batch,
                     energy_from_index, set_interaction, within_interaction)
from .paths import (StarConfig, StarEnsemble, sample_ensemble,
                    sample_ensembles_batch, sample_segment_bridge,
                    sample_segment_free)

BRIDGE, TAIL, REDRAW = "bridge", "tail", "redraw"
MOVE_KINDS = (BRIDGE, TAIL, REDRAW)


@dataclass(frozen=True)
class MoveMix:
    """Proposal mixture.  Bridge segments have geometric length with the given
    mean; redraws guard against trapping at high beta."""

    bridge: float = 0.7
    tail: float = 0.2
    redraw: float = 0.1
    mean_segment_frac: float = 1.0 / 8.0  # mean bridge length as fraction of n

    def __post_init__(self):
        if min(self.bridge, self.tail, self.redraw) < 0:
            raise ValueError("move weights must be nonnegative")
        if self.bridge + self.tail + self.redraw <= 0:
            raise ValueError("at least one move kind must have positive weight")

    @property
    def probabilities(self) -> np.ndarray:
        w = np.array([self.bridge, self.tail, self.redraw])
        return w / w.sum()


@dataclass
class ChainState:
    """Mutable MCMC state: ensemble positions, cell index over sample points,
    cached energy, rng stream and move statistics."""

    config: StarConfig
    positions: np.ndarray  # (N, n+1, d)
    index: CellIndex
    energy: EnergyBreakdown
    rng: np.random.Generator
    mix: MoveMix = field(default_factory=MoveMix)
    proposed: dict = field(default_factory=lambda: {k: 0 for k in MOVE_KINDS})
    accepted: dict = field(default_factory=lambda: {k: 0 for k in MOVE_KINDS})
    accepted_since_check: int = 0
    check_every: int = 1000

    def ensemble(self) -> StarEnsemble:
        return StarEnsemble(self.config, self.positions.copy())

    def acceptance_rates(self) -> dict:
        return {k: (self.accepted[k] / self.proposed[k] if self.proposed[k] else float("nan"))
                for k in MOVE_KINDS}


def init_chain(config: StarConfig, rng: np.random.Generator,
               mix: MoveMix | None = None, spread: float = 0.0,
               check_every: int = 1000) -> ChainState:
    """Fresh chain from a driftless draw.  spread > 0 displaces branch k's
    increments by a constant outward mean (endpoint mean spread * theta_k) to
    shorten burn-in at high beta; post-burn-in statistics must not depend on it.
    """
    ens = sample_ensemble(config, rng)
    positions = ens.positions
    if spread > 0:
        from .geometry import uniform_sphere_directions
        theta = uniform_sphere_directions(config.d, config.N, rng)
        t = config.grid().times
        positions = positions + spread * (t / config.T)[None, :, None] * theta[:, None, :]
        positions[:, 0, :] = 0.0
    pts = positions[:, : config.n, :].reshape(config.N * config.n, config.d)
    labels = np.repeat(np.arange(config.N), config.n)
    index = CellIndex(pts, labels)
    energy = energy_from_index(index, config.d, config.grid().dt)
    return ChainState(config, positions, index, energy, rng,
                      mix or MoveMix(), check_every=check_every)


def _propose_move(state: ChainState):
    """Pick (kind, branch, i, j) and draw the replacement segment.

    Returns (kind, branch, first_changed, last_changed_exclusive, new_coords)
    where new_coords covers position indices [first, last)."""
    cfg = state.config
    rng = state.rng
    n = cfg.n
    kind = MOVE_KINDS[rng.choice(3, p=state.mix.probabilities)]
    branch = int(rng.integers(cfg.N))
    if kind == REDRAW:
        i, j = 0, n
    elif kind == TAIL:
        i = int(rng.integers(n))
        j = n
    else:
        mean_len = max(1.0, state.mix.mean_segment_frac * n)
        length = min(n, 1 + rng.geometric(1.0 / mean_len))
        i = int(rng.integers(n - length + 1))
        j = i + length
    old = state.positions[branch]
    if j == n:
        new_seg = sample_segment_free(old[i], j - i, cfg.grid().dt, cfg.d, rng)
        return kind, branch, i + 1, n + 1, new_seg
    if j - i == 1:
        return kind, branch, i + 1, i + 1, np.empty((0, cfg.d))
    new_seg = sample_segment_bridge(old[i], old[j], j - i, cfg.grid().dt, cfg.d, rng)
    return kind, branch, i + 1, j, new_seg


def mh_step(state: ChainState) -> bool:
    """One Metropolis step; returns True on acceptance.  The chain targets the
    penalized measure over discretized ensembles."""
    cfg = state.config
    kind, branch, first, last, new_coords = _propose_move(state)
    state.proposed[kind] += 1
    if last == first:  # no free interior points: identity proposal
        state.accepted[kind] += 1
        return True

    # sample points are position indices < n; their flat ids in the index
    idx_last = min(last, cfg.n)
    mod_pos = np.arange(first, idx_last)
    mod_ids = branch * cfg.n + mod_pos
    old_coords = state.positions[branch, first:idx_last, :]
    new_energy_coords = new_coords[: idx_last - first]
    excl = set(int(i) for i in mod_ids)
    dt = cfg.grid().dt

    old_self, old_cross = set_interaction(state.index, old_coords, branch, excl, cfg.d)
    old_within = within_interaction(old_coords, cfg.d)
    new_self, new_cross = set_interaction(state.index, new_energy_coords, branch,
                                          excl, cfg.d)
    new_within = within_interaction(new_energy_coords, cfg.d)

    d_self = (2.0 * (new_self - old_self) + (new_within - old_within)) * dt * dt
    d_cross = 2.0 * (new_cross - old_cross) * dt * dt
    d_total = d_self + d_cross

    accept = True
    if cfg.beta > 0 and d_total > 0:
        accept = state.rng.random() < np.exp(-cfg.beta * d_total)
    elif cfg.beta > 0:
        state.rng.random()  # keep the stream aligned across accept branches
    else:
        state.rng.random()
    if not accept:
        return False

    state.positions[branch, first:last, :] = new_coords
    if mod_ids.size:
        state.index.move(mod_ids, new_energy_coords)
    state.energy.total += d_total
    state.energy.self_part += d_self
    state.energy.cross_part += d_cross
    state.accepted[kind] += 1
    state.accepted_since_check += 1
    if state.check_every and state.accepted_since_check >= state.check_every:
        state.accepted_since_check = 0
        fresh = energy_from_index(state.index, cfg.d, dt)
        scale = max(1.0, abs(fresh.total))
        if abs(fresh.total - state.energy.total) > 1e-9 * scale:
            raise RuntimeError("incremental energy cache drifted from recomputation")
        state.energy = fresh  # rebase to kill accumulated rounding
    return True


def branch_suprema(positions: np.ndarray) -> np.ndarray:
    """Per-branch max over all grid points of |X|, shape (N,)."""
    return np.linalg.norm(positions, axis=2).max(axis=1)


def lower_median(values: np.ndarray) -> float:
    """ceil(N/2)-th smallest order statistic."""
    N = len(values)
    return float(np.sort(values)[(N + 1) // 2 - 1])


@dataclass
class ChainRecord:
    step: int
    energy_total: float
    energy_self: float
    energy_cross: float
    radius_median: float
    suprema: np.ndarray
    acceptance: dict


def run_chain(config: StarConfig, total_steps: int, burn_in: int, thinning: int,
              rng: np.random.Generator, mix: MoveMix | None = None,
              spread: float = 0.0, check_every: int = 1000) -> list[ChainRecord]:
    """Run one chain and emit thinned post-burn-in observable records."""
    if burn_in >= total_steps:
        raise ValueError("burn-in must be smaller than the step budget")
    if thinning < 1:
        raise ValueError("thinning must be at least 1")
    state = init_chain(config, rng, mix, spread=spread, check_every=check_every)
    records: list[ChainRecord] = []
    for step in range(total_steps):
        mh_step(state)
        if step >= burn_in and (step - burn_in) % thinning == 0:
            sups = branch_suprema(state.positions)
            records.append(ChainRecord(
                step=step,
                energy_total=state.energy.total,
                energy_self=state.energy.self_part,
                energy_cross=state.energy.cross_part,
                radius_median=lower_median(sups),
                suprema=sups,
                acceptance=state.acceptance_rates(),
            ))
    return records


@dataclass
class WeightedEstimates:
    """Ratio estimates of observables under the penalized measure from
    driftless draws weighted by exp(-beta * E)."""

    means: dict
    sigmas: dict
    mean_weight: float        # unbiased estimate of the normalizer
    mean_weight_sigma: float
    ess: float
    n_samples: int


def naive_weighted(config: StarConfig, n_samples: int, rng: np.random.Generator,
                   r1: float | None = None, r2: float | None = None,
                   budget: int = 4096, chunk: int | None = None) -> WeightedEstimates:
    """Weighted-sampling oracle: exact for any observable, cost O(n_samples *
    (N n)^2), so guarded to small instances."""
    P = config.N * config.n
    if P > budget:
        raise ValueError(f"instance too large for the naive oracle: N*n={P} > {budget}")
    if chunk is None:
        chunk = max(1, int(4e6 // max(1, P * P)))  # keeps kernel temporaries small
    dt = config.grid().dt

    obs_names = ["energy_total", "energy_self", "energy_cross", "radius_median"]
    if r1 is not None:
        obs_names.append("rate_below")
    if r2 is not None:
        obs_names.append("rate_above")
    w_sum = 0.0
    w_sq_sum = 0.0
    wg_sum = {name: 0.0 for name in obs_names}
    rows_w = []
    rows_g = {name: [] for name in obs_names}

    done = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        positions = sample_ensembles_batch(config, b, rng)
        tot, selfp, cross = energy_brute_batch(positions, config.d, dt)
        sups = np.linalg.norm(positions, axis=3).max(axis=2)  # (b, N)
        k = (config.N + 1) // 2 - 1
        medians = np.sort(sups, axis=1)[:, k]
        w = np.exp(-config.beta * tot)
        g = {"energy_total": tot, "energy_self": selfp, "energy_cross": cross,
             "radius_median": medians}
        if r1 is not None:
            g["rate_below"] = (medians <= r1).astype(float)
        if r2 is not None:
            g["rate_above"] = (medians >= r2).astype(float)
        w_sum += float(w.sum())
        w_sq_sum += float((w * w).sum())
        rows_w.append(w)
        for name in obs_names:
            wg_sum[name] += float((w * g[name]).sum())
            rows_g[name].append(g[name])
        done += b

    w_all = np.concatenate(rows_w)
    wbar = w_sum / n_samples
    means = {}
    sigmas = {}
    for name in obs_names:
        g_all = np.concatenate(rows_g[name])
        est = wg_sum[name] / w_sum
        # delta method for the ratio estimator
        resid = w_all * (g_all - est)
        sigmas[name] = float(np.std(resid) / (wbar * np.sqrt(n_samples)))
        means[name] = float(est)
    ess = w_sum * w_sum / w_sq_sum
    mw_sigma = float(np.std(w_all) / np.sqrt(n_samples))
    return WeightedEstimates(means, sigmas, wbar, mw_sigma, float(ess), n_samples)
