"""Exception and warning classes raised by dmc."""


class DMCError(Exception):
    """Base class for all dmc errors."""


class ValidationError(DMCError, ValueError):
    """Invalid argument or malformed input array."""


class DegenerateInputError(ValidationError):
    """Input is well-formed but carries no usable structure (zero variance, all-zero distances)."""


class NumericalFailureError(DMCError, ArithmeticError):
    """An iterative numerical routine did not converge."""

    def __init__(self, message, off_norm=None):
        super().__init__(message)
        self.off_norm = off_norm


class NoLinearRegionError(NumericalFailureError):
    """The weight-sum curve has no usable linear region; pass epsilon explicitly."""


class ParseError(DMCError):
    """A matrix file could not be parsed."""

    def __init__(self, message, line=None, offset=None):
        super().__init__(message)
        self.line = line
        self.offset = offset


class DegenerateSplitWarning(UserWarning):
    """A clustering produced fewer clusters than requested."""


class ZeroVarianceWarning(UserWarning):
    """A vector with zero spread was passed where a spread is needed."""
