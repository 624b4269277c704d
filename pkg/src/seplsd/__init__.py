"""Limiting spectral distributions of sums of separable-covariance sample matrices."""

__version__ = "0.1.0"

from .closedform import MpParams, identity_model, mp_density, mp_params, mp_stieltjes, scale_multiple_reduce
from .kernel import kernel_O, map_P, map_Q
from .lsd import (
    CdfTable,
    DensityGrid,
    cdf_from_density,
    default_grid,
    dual_stieltjes,
    invert_density,
    point_mass_zero,
    stieltjes_alt1,
    stieltjes_alt2,
    stieltjes_primary,
)
from .measure import (
    DiscreteMeasureK,
    ModelSpec,
    jesd_from_eigenvalue_tuples,
    make_measure,
    mass_at_origin,
    moment,
    truncate,
    validate_model,
)
from .metrics import compare, continuity_probe, kolmogorov_distance, levy_bound
from .simulator import esd, simulate_exponential_study
from .solver import SolverConfig, residual, solve_grid, solve_hg, uniqueness_probe

__all__ = [
    "__version__",
    "MpParams",
    "identity_model",
    "mp_density",
    "mp_params",
    "mp_stieltjes",
    "scale_multiple_reduce",
    "kernel_O",
    "map_P",
    "map_Q",
    "CdfTable",
    "DensityGrid",
    "cdf_from_density",
    "default_grid",
    "dual_stieltjes",
    "invert_density",
    "point_mass_zero",
    "stieltjes_alt1",
    "stieltjes_alt2",
    "stieltjes_primary",
    "DiscreteMeasureK",
    "ModelSpec",
    "jesd_from_eigenvalue_tuples",
    "make_measure",
    "mass_at_origin",
    "moment",
    "truncate",
    "validate_model",
    "compare",
    "continuity_probe",
    "kolmogorov_distance",
    "levy_bound",
    "esd",
    "simulate_exponential_study",
    "SolverConfig",
    "residual",
    "solve_grid",
    "solve_hg",
    "uniqueness_probe",
]
