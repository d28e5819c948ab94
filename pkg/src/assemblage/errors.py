"""Exception hierarchy shared across the package."""

from __future__ import annotations


class AssemblageError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(AssemblageError, ValueError):
    pass


DimensionMismatch = ShapeMismatch


class InfeasibleConstraints(AssemblageError):
    """Equality constraints cannot be met together with nonnegativity."""


class NotConverged(AssemblageError):
    """Solver stopped with KKT residuals above tolerance.

    The best iterate is attached as ``solution`` so callers can inspect the
    final residuals instead of losing them.
    """

    def __init__(self, message: str, solution=None):
        super().__init__(message)
        self.solution = solution


class TooManyDimensions(AssemblageError):
    pass


class InsufficientHistory(AssemblageError):
    pass


class NonPositiveLevel(AssemblageError, ValueError):
    pass


class InsufficientFuture(AssemblageError):
    pass


class EmptyIntersection(AssemblageError):
    pass


class WindowTooLong(AssemblageError):
    pass


class MeanNearZero(AssemblageError):
    pass


class TooFewObservations(AssemblageError):
    pass


class DegenerateSeries(AssemblageError):
    pass


class UnmappedComponent(AssemblageError, KeyError):
    pass


class ConfigError(AssemblageError):
    """Bad configuration or unreadable input file (CLI exit code 2)."""
