"""eqfield: simulation, computation and verification toolkit for extremes of
sparse equicorrelated Gaussian fields."""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateColumnError, DomainError,
                     EqfieldError, FactorizationError, InputError,
                     NumericError, ScaleError, SizeError)
from .streams import Stream

__all__ = [
    "ConfigError", "DegenerateColumnError", "DomainError", "EqfieldError",
    "FactorizationError", "InputError", "NumericError", "ScaleError",
    "SizeError", "Stream", "__version__",
]
