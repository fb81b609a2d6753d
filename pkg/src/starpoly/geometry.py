"""Unit-ball geometry: volumes, lens (two-ball overlap) volumes, sphere sampling.

The overlap volume of two unit balls at center distance r is the exact pair
kernel of the occupation-measure energy; everything downstream trusts the
closed forms here, which are validated once against a Monte Carlo
point-counting oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_BALL_VOLUME = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}


def ball_volume(d: int) -> float:
    """Volume of the unit ball in dimension d (d in {1,2,3})."""
    try:
        return _BALL_VOLUME[d]
    except KeyError:
        raise ValueError(f"unsupported dimension {d!r}; must be 1, 2 or 3") from None


def overlap_volume_array(d: int, r):
    """Vectorized |B_1(a) ∩ B_1(b)| for center distances r >= 0.

    d=1: interval overlap 2-r; d=2: circular-segment lens; d=3: spherical lens.
    Zero for r >= 2.
    """
    ball_volume(d)  # dimension check
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("center distance must be nonnegative")
    # clip keeps arccos/sqrt arguments in range; values at r>=2 are overwritten
    rc = np.clip(r, 0.0, 2.0)
    if d == 1:
        out = 2.0 - rc
    elif d == 2:
        out = 2.0 * np.arccos(rc / 2.0) - (rc / 2.0) * np.sqrt(4.0 - rc**2)
    else:
        out = np.pi * (4.0 + rc) * (2.0 - rc) ** 2 / 12.0
    return np.where(r >= 2.0, 0.0, out)


def overlap_volume(d: int, r: float) -> float:
    """Exact intersection volume of two unit balls at center distance r."""
    return float(overlap_volume_array(d, r))


@dataclass(frozen=True)
class OverlapKernel:
    """Pair kernel r -> |B_1 ∩ B_1| at separation r, for a fixed dimension.

    Finite, nonnegative, supported on [0, 2).
    """

    dimension: int

    def __post_init__(self):
        ball_volume(self.dimension)

    def __call__(self, r):
        return overlap_volume_array(self.dimension, r)

    @property
    def at_zero(self) -> float:
        return ball_volume(self.dimension)

    #: separations beyond this contribute nothing
    support_radius: float = 2.0


def uniform_sphere_direction(d: int, rng: np.random.Generator, symmetric: bool = False):
    """A unit vector in R^d; uniform on the sphere for d >= 2.

    For d=1 the "sphere" is {-1,+1}.  By default we return the fixed direction
    +1, matching the one-dimensional drift construction where all branches
    drift the same way.  Pass symmetric=True to draw ±1 with equal probability.
    """
    ball_volume(d)
    if d == 1:
        if symmetric:
            return np.array([1.0 if rng.random() < 0.5 else -1.0])
        return np.array([1.0])
    v = rng.standard_normal(d)
    norm = np.linalg.norm(v)
    while norm < 1e-12:  # essentially never
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
    return v / norm


def uniform_sphere_directions(d: int, count: int, rng: np.random.Generator):
    """(count, d) array of drift directions; +1 for every branch when d=1."""
    ball_volume(d)
    if d == 1:
        return np.ones((count, 1))
    v = rng.standard_normal((count, d))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    bad = norms[:, 0] < 1e-12
    while np.any(bad):
        v[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        bad = norms[:, 0] < 1e-12
    return v / norms
