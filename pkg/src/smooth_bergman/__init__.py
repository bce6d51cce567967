"""Asymptotic Bergman projections for smooth strictly plurisubharmonic weights."""

from .amplitude import Symbol, build_pipeline, calibrate, solve_recursion, verify_inversion
from .bergman_numerics import (
    KernelEstimate,
    apply_projection,
    compare_local_global,
    oracle_kernel,
    reproducing_sweep,
    sup_norm_estimate,
)
from .config import RunConfig, parse_config
from .errors import (
    BergmanError,
    ConfigError,
    ContourNotGood,
    DomainError,
    DoublingEstimateViolation,
    EllipticityFailure,
    InversionFailure,
    JetStructureError,
    OracleError,
    OrderTooLow,
    QuadratureError,
    StrictPSHViolation,
)
from .jets import Jet
from .phase_engine import build_phase, pullback_good_contour
from .polarize import Weight, check_doubling_estimate, levi_form, polarize
from .stationary_phase import apply_L, brute_force_expand, expand, fit_coefficients

__version__ = "0.1.0"

__all__ = [
    "Symbol",
    "build_pipeline",
    "calibrate",
    "solve_recursion",
    "verify_inversion",
    "KernelEstimate",
    "apply_projection",
    "compare_local_global",
    "oracle_kernel",
    "reproducing_sweep",
    "sup_norm_estimate",
    "RunConfig",
    "parse_config",
    "BergmanError",
    "ConfigError",
    "ContourNotGood",
    "DomainError",
    "DoublingEstimateViolation",
    "EllipticityFailure",
    "InversionFailure",
    "JetStructureError",
    "OracleError",
    "OrderTooLow",
    "QuadratureError",
    "StrictPSHViolation",
    "Jet",
    "build_phase",
    "pullback_good_contour",
    "Weight",
    "check_doubling_estimate",
    "levi_form",
    "polarize",
    "apply_L",
    "brute_force_expand",
    "expand",
    "fit_coefficients",
]
