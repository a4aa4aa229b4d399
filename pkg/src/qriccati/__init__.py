"""Periodic solutions of quaternionic Riccati equations with periodic coefficients."""
from .coefficients import QuaternionCoefficient, RealFourierSeries, RiccatiSystem, discriminants
from .conditions import check_theorem31_conditions, check_wilczynski, estimate_m0
from .finder import FinderSettings, PeriodicSolutionReport, classify_pair, find_periodic_solution
from .integrator import IntegrationSettings, Trajectory, integrate_ivp, poincare_map
from .quaternion import Quaternion, SignedComponents, ark, conjugate, hamilton_mul, inverse, norm
from .transforms import apply_basic_transform, classify_sign_case, lambda_conjugation, reduce_to_case_I

__version__ = "0.1.0"

__all__ = [
    "FinderSettings",
    "IntegrationSettings",
    "PeriodicSolutionReport",
    "Quaternion",
    "QuaternionCoefficient",
    "RealFourierSeries",
    "RiccatiSystem",
    "SignedComponents",
    "Trajectory",
    "apply_basic_transform",
    "ark",
    "check_theorem31_conditions",
    "check_wilczynski",
    "classify_pair",
    "classify_sign_case",
    "conjugate",
    "discriminants",
    "estimate_m0",
    "find_periodic_solution",
    "hamilton_mul",
    "integrate_ivp",
    "inverse",
    "lambda_conjugation",
    "norm",
    "poincare_map",
    "reduce_to_case_I",
]
