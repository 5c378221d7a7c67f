"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all package-specific errors."""


class EmptyDomainError(LabError, ValueError):
    """Raised when an argument lies outside the meaningful domain (e.g. a sieve limit below 2)."""


class PoleError(LabError, ArithmeticError):
    """Raised when an evaluation point coincides with a pole."""


class PrecisionError(LabError):
    """Raised when the requested absolute error cannot be certified."""


class NearZeroError(LabError):
    """Raised when |L| drops below the safe floor along an argument-tracking path."""


class PathError(LabError):
    """Raised when the adaptive argument-tracking walk exceeds its step budget."""


class CutoffError(LabError):
    """Raised when a truncation tail bound exceeds the configured tolerance."""


class DimensionMismatchError(LabError, ValueError):
    """Raised when measures, grids or vectors disagree in dimension."""
