"""Exception hierarchy shared across the package."""


class GraphonLabError(Exception):
    """Base class for all graphonlab errors."""


class DomainError(GraphonLabError):
    """A point lies outside the unit square [0,1]^2."""


class ValidationError(GraphonLabError):
    """An object violates a structural invariant (symmetry, range, ...)."""


class QuadratureError(GraphonLabError):
    """Grid refinement stopped before reaching the requested tolerance."""

    def __init__(self, message, last_estimates=None):
        super().__init__(message)
        self.last_estimates = last_estimates


class EnumerationBudgetError(GraphonLabError):
    """Exact cut-norm enumeration was requested beyond its size budget."""
