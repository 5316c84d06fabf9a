"""Exception types shared across the package."""


class MagboseError(Exception):
    """Base class for all package errors."""


class DomainError(MagboseError, ValueError):
    """An argument lies outside the region where the quantity is defined."""


class NumericalError(MagboseError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy.

    ``estimate`` carries the achieved error estimate when one is available.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class QuadratureError(NumericalError):
    """Contour quadrature did not resolve the integrand."""


class ConfigError(MagboseError, ValueError):
    """Invalid run configuration."""
