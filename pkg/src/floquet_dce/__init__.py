"""Complex Floquet-Liouvillian spectra of a parametrically driven cavity
coupled to a semi-infinite tight-binding photonic band.

The package solves the nonlinear complex eigenvalue problem of the 2x2
effective Floquet generator with an energy-dependent self-energy, tracks
eigenvalue branches over the reduced cavity frequency, locates bifurcation
and stationary points, and validates everything against brute-force
discretized-band oracles.
"""

from .model import ModelParams, ReducedParams, reduce_params, check_rotating_frame_validity
from .selfenergy import Sheet, sigma, sigma_derivative, discrete_sigma, DiscretizedBand, make_band
from .dispersion import (
    SheetPair, Root, build_leff, dispersion_value, dispersion_derivative,
    solve_roots, count_roots_in_box, default_seeds,
)
from .sweep import Branch, CriticalPoint, sweep_branches, find_exceptional, find_stationary, emit_sweep_csv
from .phenom import PhenomParams, phenom_eigenvalues, phenom_stationary, phenom_bifurcation_edges
from .perturbation import PerturbativeResult, perturb_creation, perturb_window_report
from .modes import ModeCoefficients, amplitude_ratios, normalization_product, band_amplitudes, export_mode
from . import bandoracle, scenarios

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "ReducedParams", "reduce_params", "check_rotating_frame_validity",
    "Sheet", "sigma", "sigma_derivative", "discrete_sigma", "DiscretizedBand", "make_band",
    "SheetPair", "Root", "build_leff", "dispersion_value", "dispersion_derivative",
    "solve_roots", "count_roots_in_box", "default_seeds",
    "Branch", "CriticalPoint", "sweep_branches", "find_exceptional", "find_stationary",
    "emit_sweep_csv",
    "PhenomParams", "phenom_eigenvalues", "phenom_stationary", "phenom_bifurcation_edges",
    "PerturbativeResult", "perturb_creation", "perturb_window_report",
    "ModeCoefficients", "amplitude_ratios", "normalization_product", "band_amplitudes",
    "export_mode",
    "bandoracle", "scenarios",
]
