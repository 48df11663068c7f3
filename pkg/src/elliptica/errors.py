"""Exception types raised across the package."""


class EllipticaError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(EllipticaError, ValueError):
    """Array shape is unusable (too small, wrong rank, mismatched)."""


class InvalidParameterError(EllipticaError, ValueError):
    """A scalar parameter is outside its admissible range."""


class DivergenceError(EllipticaError, ArithmeticError):
    """The relaxation produced a non-finite value."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite value at iteration {iteration}")


class SingularSystemError(EllipticaError, ArithmeticError):
    """The assembled dense system could not be solved."""


class SystemTooLargeError(EllipticaError, ValueError):
    """Dense assembly was requested for a grid above the size guard."""


class ImageDecodeError(EllipticaError, ValueError):
    """An image file exists but its payload is malformed or unsupported."""
