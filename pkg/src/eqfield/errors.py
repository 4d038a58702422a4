"""Semantic exception hierarchy shared by all eqfield modules."""


class EqfieldError(Exception):
    """Base class for all eqfield errors."""


class DomainError(EqfieldError, ValueError):
    """An input falls outside the mathematical domain of an operation."""


class SizeError(EqfieldError, ValueError):
    """A problem size exceeds a configured dense-path cap."""


class ConfigError(EqfieldError, ValueError):
    """An experiment or budget configuration is invalid."""


class NumericError(EqfieldError, ArithmeticError):
    """A numeric routine failed to reach its requested accuracy."""


class FactorizationError(NumericError):
    """A symmetric factorization hit a non-positive pivot."""

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot_index} "
            f"has value {pivot_value:.6g}"
        )


class DegenerateColumnError(DomainError):
    """A data column has zero sample variance."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} has zero sample variance")


class ScaleError(DomainError):
    """A standardization scale degenerates for the given parameters."""


class InputError(EqfieldError, ValueError):
    """Malformed external input (missing pairs, bad file contents)."""
