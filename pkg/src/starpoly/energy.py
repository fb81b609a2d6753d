"""Exact energy of the discrete occupation measure.

With the left-endpoint convention, position X_i occupies [t_i, t_{i+1}), so
L(x) = dt * sum_{k,i<n} 1_{B_1(x)}(X^k_i) and the integral of L^2 over space
is exactly dt^2 times the ordered-pair sum (diagonal included) of the
two-ball overlap kernel at the pairwise distances.  energy_brute evaluates
that sum directly; energy_cells gets the identical value through a spatial
hash with cell edge 2 (the kernel support), enumerating only nearby pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .geometry import ball_volume, overlap_volume_array
from .paths import StarEnsemble


@dataclass
class EnergyBreakdown:
    """Total energy split into same-branch (self) and distinct-branch (cross)
    ordered-pair contributions; total = self_part + cross_part."""

    total: float
    self_part: float
    cross_part: float

    def copy(self) -> "EnergyBreakdown":
        return EnergyBreakdown(self.total, self.self_part, self.cross_part)


def _sample_points(ensemble: StarEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (P, d) sample points (left endpoints) and their branch labels."""
    cfg = ensemble.config
    pts = ensemble.positions[:, : cfg.n, :].reshape(cfg.N * cfg.n, cfg.d)
    labels = np.repeat(np.arange(cfg.N), cfg.n)
    return pts, labels


def energy_brute(ensemble: StarEnsemble, block: int = 1024) -> EnergyBreakdown:
    """Direct ordered-pair sum of the overlap kernel, O(P^2)."""
    cfg = ensemble.config
    pts, labels = _sample_points(ensemble)
    dt2 = cfg.grid().dt ** 2
    total = 0.0
    self_part = 0.0
    for lo in range(0, pts.shape[0], block):
        chunk = pts[lo:lo + block]
        r = np.linalg.norm(chunk[:, None, :] - pts[None, :, :], axis=2)
        kern = overlap_volume_array(cfg.d, r)
        total += float(kern.sum())
        same = labels[lo:lo + block, None] == labels[None, :]
        self_part += float(kern[same].sum())
    total *= dt2
    self_part *= dt2
    return EnergyBreakdown(total, self_part, total - self_part)


class CellIndex:
    """Spatial hash over sample points with cell edge 2 (the kernel support).

    Any two points at distance < 2 fall in the same or axis-adjacent cells,
    so pair enumeration over 3^d neighborhoods is exhaustive for the kernel.
    Points are addressed by flat id; coordinates are mutable to support the
    sampler's incremental updates.
    """

    EDGE = 2.0

    def __init__(self, points: np.ndarray, labels: np.ndarray):
        self.points = np.array(points, dtype=float)
        self.labels = np.asarray(labels)
        self.d = self.points.shape[1]
        self._offsets = [np.array(off) for off in product((-1, 0, 1), repeat=self.d)]
        self.buckets: dict[tuple, list[int]] = {}
        for pid in range(self.points.shape[0]):
            self.buckets.setdefault(self._cell(self.points[pid]), []).append(pid)

    def _cell(self, x: np.ndarray) -> tuple:
        return tuple(np.floor(x / self.EDGE).astype(np.int64))

    def neighborhood_ids(self, cell: tuple) -> np.ndarray:
        """Ids of all points in the 3^d cells around `cell` (inclusive)."""
        out = []
        for off in self._offsets:
            ids = self.buckets.get(tuple(np.asarray(cell) + off))
            if ids:
                out.extend(ids)
        return np.array(out, dtype=np.int64)

    def candidates_near(self, x: np.ndarray) -> np.ndarray:
        return self.neighborhood_ids(self._cell(x))

    def move(self, ids: np.ndarray, new_coords: np.ndarray):
        """Relocate existing points; buckets are updated in place."""
        for pid, coord in zip(ids, new_coords):
            old_cell = self._cell(self.points[pid])
            new_cell = self._cell(coord)
            self.points[pid] = coord
            if old_cell != new_cell:
                self.buckets[old_cell].remove(pid)
                if not self.buckets[old_cell]:
                    del self.buckets[old_cell]
                self.buckets.setdefault(new_cell, []).append(int(pid))


def energy_cells(ensemble: StarEnsemble) -> EnergyBreakdown:
    """Cell-list evaluation; identical value to energy_brute."""
    cfg = ensemble.config
    pts, labels = _sample_points(ensemble)
    index = CellIndex(pts, labels)
    return energy_from_index(index, cfg.d, cfg.grid().dt)


def energy_from_index(index: CellIndex, d: int, dt: float) -> EnergyBreakdown:
    total = 0.0
    self_part = 0.0
    for cell, ids in index.buckets.items():
        cand = index.neighborhood_ids(cell)
        ids = np.asarray(ids)
        r = np.linalg.norm(index.points[ids][:, None, :] - index.points[cand][None, :, :],
                           axis=2)
        kern = overlap_volume_array(d, r)
        total += float(kern.sum())
        same = index.labels[ids][:, None] == index.labels[cand][None, :]
        self_part += float(kern[same].sum())
    total *= dt * dt
    self_part *= dt * dt
    return EnergyBreakdown(total, self_part, total - self_part)


def set_interaction(index: CellIndex, coords: np.ndarray, branch: int,
                    exclude: set[int], d: int) -> tuple[float, float]:
    """Unordered interaction of external coords against indexed points not in
    `exclude`, split into (same-branch, other-branch) kernel sums (no dt^2)."""
    if coords.shape[0] == 0:
        return 0.0, 0.0
    P = index.points.shape[0]
    if coords.shape[0] * P <= 2**24:
        # dense path: a Gram-expansion distance matrix beats per-point cell
        # gathers, which degenerate anyway when the whole star sits within
        # the kernel range
        pts = index.points
        r2 = ((coords * coords).sum(axis=1)[:, None]
              + (pts * pts).sum(axis=1)[None, :] - 2.0 * (coords @ pts.T))
        np.clip(r2, 0.0, None, out=r2)
        # evaluate the kernel only inside its support
        hit = r2 < 4.0
        _, jj = np.nonzero(hit)
        kern = overlap_volume_array(d, np.sqrt(r2[hit]))
        if exclude:
            excluded = np.zeros(P, dtype=bool)
            excluded[list(exclude)] = True
            keep = ~excluded[jj]
            kern = kern[keep]
            jj = jj[keep]
        same = index.labels[jj] == branch
        self_sum = float(kern[same].sum())
        return self_sum, float(kern.sum()) - self_sum
    self_sum = 0.0
    cross_sum = 0.0
    for x in coords:
        cand = index.candidates_near(x)
        if cand.size == 0:
            continue
        if exclude:
            keep = np.fromiter((c not in exclude for c in cand), dtype=bool,
                               count=cand.size)
            cand = cand[keep]
            if cand.size == 0:
                continue
        r = np.linalg.norm(index.points[cand] - x, axis=1)
        kern = overlap_volume_array(d, r)
        same = index.labels[cand] == branch
        self_sum += float(kern[same].sum())
        cross_sum += float(kern[~same].sum())
    return self_sum, cross_sum


def within_interaction(coords: np.ndarray, d: int) -> float:
    """Ordered-pair kernel sum among a coordinate set (diagonal included)."""
    if coords.shape[0] == 0:
        return 0.0
    r = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
    return float(overlap_volume_array(d, r).sum())


def energy_brute_batch(positions: np.ndarray, d: int, dt: float
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized energies for a (batch, N, n+1, d) position array.

    Returns (total, self_part, cross_part), each of shape (batch,).  Memory
    scales with batch * (N*n)^2, so callers chunk the batch for large P.
    """
    B, N, np1, _ = positions.shape
    n = np1 - 1
    pts = positions[:, :, :n, :].reshape(B, N * n, d)
    labels = np.repeat(np.arange(N), n)
    # squared distances via the Gram expansion; cheaper than a (B,P,P,d) diff
    gram = np.einsum("bid,bjd->bij", pts, pts)
    sq = np.einsum("bid,bid->bi", pts, pts)
    r2 = sq[:, :, None] + sq[:, None, :] - 2.0 * gram
    np.clip(r2, 0.0, None, out=r2)
    r = np.sqrt(r2)
    kern = overlap_volume_array(d, r)
    total = kern.sum(axis=(1, 2)) * dt * dt
    same = labels[:, None] == labels[None, :]
    self_part = (kern * same).sum(axis=(1, 2)) * dt * dt
    return total, self_part, total - self_part


def penalization_weight(E: float, beta: float) -> float:
    """exp(-beta * E); the reweighting factor of the penalized measure."""
    if E < 0:
        raise ValueError("energy must be nonnegative")
    if beta < 0:
        raise ValueError("penalty must be nonnegative")
    return float(np.exp(-beta * E))


def confinement_lower_bound(d: int, m: int, T: float, r: float) -> float:
    """Exact Cauchy-Schwarz floor on the energy of m branches confined to
    B_r(0): the occupation measure then has mass m*T*V_d supported in
    B_{r+1}(0), so its squared integral is at least m^2 T^2 V_d / (r+1)^d.
    """
    if m < 1:
        raise ValueError("need at least one confined branch")
    if r < 0:
        raise ValueError("confinement radius must be nonnegative")
    if T <= 0:
        raise ValueError("horizon must be positive")
    V = ball_volume(d)
    return (m * T * V) ** 2 / (V * (r + 1.0) ** d)
