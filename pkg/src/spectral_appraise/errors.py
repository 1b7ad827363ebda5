"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside its documented domain."""


class DataFormatError(ValueError):
    """A data file is malformed or truncated."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or lost too much accuracy.

    The message names the stage that failed (e.g. the secular interval).
    """


class PsdViolationError(NumericalError):
    """A downdate produced an eigenvalue below the negative tolerance."""


class UnsupportedPhiError(InvalidArgumentError):
    """The eigenvalue function does not admit the requested operation."""
