"""Exception types raised across the package."""

from __future__ import annotations


class BergmanError(Exception):
    """Base class for computational failures (CLI exit code 1)."""


class JetStructureError(BergmanError, ValueError):
    """Jets with incompatible base point, variable count or index."""


class OrderTooLow(BergmanError):
    """A truncation order is too small for the requested computation."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class StrictPSHViolation(BergmanError):
    """The Levi form is not positive definite."""

    def __init__(self, message: str, smallest_eigenvalue: float):
        super().__init__(f"{message} (smallest eigenvalue {smallest_eigenvalue:.3e})")
        self.smallest_eigenvalue = smallest_eigenvalue


class DoublingEstimateViolation(BergmanError):
    def __init__(self, message: str, witness):
        super().__init__(f"{message}; witness pair {witness}")
        self.witness = witness


class ContourNotGood(BergmanError):
    """Im f failed to be positive on the sampled contour."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class EllipticityFailure(BergmanError):
    pass


class InversionFailure(BergmanError):
    def __init__(self, message: str, ell: int | None = None):
        super().__init__(message)
        self.ell = ell


class QuadratureError(BergmanError):
    pass


class DomainError(BergmanError, ValueError):
    pass


class OracleError(BergmanError):
    pass


class ConfigError(ValueError):
    """Malformed run configuration (CLI exit code 2)."""
