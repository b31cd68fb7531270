"""Exception hierarchy.

Validation errors (bad parameters, malformed grids or partitions) subclass
``ValueError`` and map to CLI exit code 2; numerical failures subclass
``ArithmeticError`` and map to exit code 1.
"""


class MFBMError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MFBMError, ValueError):
    pass


class DomainError(ValidationError):
    """A parameter lies outside the range where the computation is defined."""


class DimensionMismatch(ValidationError):
    pass


class InvalidPartition(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class InvalidGrid(ValidationError):
    """An alpha grid is not strictly increasing and positive."""


class NumericError(MFBMError, ArithmeticError):
    pass


class NotPositiveDefinite(NumericError):
    pass


class ConvergenceFailure(NumericError):
    pass
