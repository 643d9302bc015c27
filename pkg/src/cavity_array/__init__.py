"""Steady states, spatial coherence and emission spectra of pumped cavity-emitter arrays."""

__version__ = "0.1.0"

from .model import LatticeSpec, ModelParams, BlochSpectrum, build_momenta, build_spectrum
from .steady import (SteadyState, solve, closed_form_single_site, lasing_benchmarks,
                     mode_population, polarization)
from .correlations import (correlation_profile, fit_decay, analytic_decay_1d,
                           regime_estimates, fast_decay_check)
from .oracle import FockTruncation, build_liouvillian, solve_oracle, steady_density_matrix
from .spectrum import multimode_drive, detector_spectrum, sideband_positions

__all__ = [
    "LatticeSpec", "ModelParams", "BlochSpectrum", "build_momenta", "build_spectrum",
    "SteadyState", "solve", "closed_form_single_site", "lasing_benchmarks",
    "mode_population", "polarization",
    "correlation_profile", "fit_decay", "analytic_decay_1d", "regime_estimates",
    "fast_decay_check",
    "FockTruncation", "build_liouvillian", "solve_oracle", "steady_density_matrix",
    "multimode_drive", "detector_spectrum", "sideband_positions",
]
