"""Exception types shared across the package."""


class HyperpackError(Exception):
    """Base class for all package errors."""


class DimensionError(HyperpackError, ValueError):
    """Vectors or points of incompatible dimension."""


class DomainError(HyperpackError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class EmptyIntersectionError(DomainError):
    """Two r-balls whose centres are at least 2r apart."""


class NoRootError(HyperpackError, ArithmeticError):
    """The threshold function has no sign change on (0, R].

    ``boundary_value`` is the value of the threshold function at x = R.
    """

    def __init__(self, message, boundary_value=None):
        super().__init__(message)
        self.boundary_value = boundary_value


class ConfigError(HyperpackError, ValueError):
    """Invalid simulation configuration."""


class ResourceError(HyperpackError, RuntimeError):
    """Request would exceed the desk-scale resource limits."""
