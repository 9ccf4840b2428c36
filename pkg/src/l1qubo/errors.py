"""Exception types raised across the package."""


class QuboError(Exception):
    """Base class for all package errors."""


class DimensionError(QuboError, ValueError):
    """Assignment length or variable coverage does not match the model."""


class DomainError(QuboError, ValueError):
    """A value lies outside its allowed domain."""


class UnsupportedDegreeError(QuboError, ValueError):
    """A polynomial term has degree three or higher."""


class SizeError(QuboError, ValueError):
    """Problem too large for exhaustive enumeration."""


class InfeasibleGadgetError(QuboError, ValueError):
    """A gadget cannot represent its input with the requested encodings."""


class ParseError(QuboError, ValueError):
    """Malformed model file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
