"""Exception types shared across the package."""

from __future__ import annotations


class GeometryError(ValueError):
    """Raised for degenerate or invalid curves and regions."""


class SingularEvaluationError(ValueError):
    """Raised when a kernel is evaluated at a coincident point or image."""


class AccuracyError(RuntimeError):
    """Raised when a quadrature does not reach its tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    achieved : float
        Error estimate reached when the subdivision budget ran out.
    """

    def __init__(self, message: str, achieved: float) -> None:
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class StepRejected(RuntimeError):
    """Raised when a time step violates the CFL restriction."""

    def __init__(self, message: str, suggested_dt: float) -> None:
        super().__init__(f"{message}; suggested dt = {suggested_dt:.6e}")
        self.suggested_dt = suggested_dt


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a formula."""


class UsageError(ValueError):
    """Raised for invalid configuration keys or values."""
