"""Green's function, conformal blow-up and mass for cohomogeneity-one Einstein 4-manifolds."""

from .blowup import BlowupFields, compute_fields, f_asymptote_mass
from .estimators import BlowupMassEstimator, GreenFunctionSolver
from .greensolve import GreenSolution, SolverOptions, mass_from_expansion, solve_green
from .mass import MassReport, mass_report
from .pipeline import ScenarioConfig, convergence_table, run_scenario
from .profiles import (WarpedProfile, fubini_study_profile, perturbed_s4_profile, profile_from_name,
                       round_s4_profile, volume)

__all__ = [
    "BlowupFields",
    "BlowupMassEstimator",
    "GreenFunctionSolver",
    "GreenSolution",
    "MassReport",
    "ScenarioConfig",
    "SolverOptions",
    "WarpedProfile",
    "compute_fields",
    "convergence_table",
    "f_asymptote_mass",
    "fubini_study_profile",
    "mass_from_expansion",
    "mass_report",
    "perturbed_s4_profile",
    "profile_from_name",
    "round_s4_profile",
    "run_scenario",
    "solve_green",
    "volume",
]
__version__ = "0.1.0"
