"""Charged ideal Bose gas in a constant magnetic field inside a Dirichlet cube."""

from .errors import ConfigError, DomainError, MagboseError, NumericalError, QuadratureError
from .spectrum import GasParams, Gauge, GridSpec, Spectrum, get_spectrum

__all__ = [
    "ConfigError", "DomainError", "MagboseError", "NumericalError", "QuadratureError",
    "GasParams", "Gauge", "GridSpec", "Spectrum", "get_spectrum",
]
__version__ = "0.1.0"
