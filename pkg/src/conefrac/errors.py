"""Exception types shared across the package."""

from __future__ import annotations


class ConefracError(Exception):
    """Base class for all package-specific errors."""


class InputDomainError(ConefracError, ValueError):
    """A parameter lies outside the admissible range of an operation."""


class NonsmoothPointError(ConefracError):
    """A derivative or a pointwise operator evaluation was requested on a
    kink surface, where the function is not twice differentiable."""


class DegenerateDensityError(ConefracError):
    """The directional weight vanishes identically; ellipticity is void."""


class DegenerateConstructionError(ConefracError):
    """No explicit supersolution exists for the requested exponent."""


class AccuracyError(ConefracError):
    """The quadrature budget was exhausted before reaching the requested
    tolerance.  Carries the best available estimate."""

    def __init__(self, message: str, value: float = float("nan"),
                 abs_error_estimate: float = float("inf")):
        super().__init__(message)
        self.value = value
        self.abs_error_estimate = abs_error_estimate


class TruncationError(ConefracError):
    """The requested truncated domain cannot meet the tail-remainder bound."""


class SearchFailureError(ConefracError):
    """A parameter search exhausted its grid without a verified value."""


class ExpectationFailedError(ConefracError):
    """A CLI --expect assertion did not hold."""
