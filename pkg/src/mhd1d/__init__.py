"""One-dimensional compressible heat-conductive MHD without resistivity,
solved in Lagrangian mass coordinates, plus the verification oracles."""

from .errors import (ConfigError, DataValidationError, Mhd1dError, NewtonError,
                     NormSpecError, PositivityError)
from .model import (FluidParameters, InitialData, MassGrid, State, flux_psi,
                    magnetic_field, pressure, stress_sigma, validate_initial)
from .solver import SchemeConfig, Trajectory, implicit_heat_solve, run, stable_dt, step
from .oracles import (DiagnosticRecord, NormSpec, TestFunction, diagnose_trajectory,
                      diagnostics, j_omega, mixed_norm, representation_residual,
                      unit_density_point, weak_energy_residual, weak_momentum_residual)
from .transform import EulerianProfile, mass_from_profile, mass_to_space, to_eulerian
from .experiments import (ConvergenceResult, MollifierConfig, StabilityReport,
                          convergence_study, mollify, perturb_initial,
                          stability_experiment)
from .presets import PRESET_NAMES, load_preset
from .config import RunConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataValidationError", "Mhd1dError", "NewtonError",
    "NormSpecError", "PositivityError",
    "FluidParameters", "InitialData", "MassGrid", "State",
    "flux_psi", "magnetic_field", "pressure", "stress_sigma", "validate_initial",
    "SchemeConfig", "Trajectory", "implicit_heat_solve", "run", "stable_dt", "step",
    "DiagnosticRecord", "NormSpec", "TestFunction", "diagnose_trajectory",
    "diagnostics", "j_omega", "mixed_norm", "representation_residual",
    "unit_density_point", "weak_energy_residual", "weak_momentum_residual",
    "EulerianProfile", "mass_from_profile", "mass_to_space", "to_eulerian",
    "ConvergenceResult", "MollifierConfig", "StabilityReport",
    "convergence_study", "mollify", "perturb_initial", "stability_experiment",
    "PRESET_NAMES", "load_preset",
    "RunConfig", "parse_config",
    "__version__",
]
