"""Simulation and numerical certification toolkit for weakly self-avoiding
star polymers: penalized path sampling, effective-radius statistics,
log-normalizer bounds, and deterministic quadrature checks."""

__version__ = "0.1.0"

from .geometry import ball_volume, overlap_volume, uniform_sphere_direction
from .paths import (StarConfig, StarEnsemble, TimeGrid, TiltParams,
                    drift_params_for, kl_tilted, make_tilt, sample_brownian,
                    sample_ensemble)
from .energy import (EnergyBreakdown, confinement_lower_bound, energy_brute,
                     energy_cells, penalization_weight)

__all__ = [
    "__version__",
    "ball_volume", "overlap_volume", "uniform_sphere_direction",
    "StarConfig", "StarEnsemble", "TimeGrid", "TiltParams",
    "drift_params_for", "kl_tilted", "make_tilt", "sample_brownian",
    "sample_ensemble",
    "EnergyBreakdown", "confinement_lower_bound", "energy_brute",
    "energy_cells", "penalization_weight",
]
