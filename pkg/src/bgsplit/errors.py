"""Exception types shared across the package."""


class BgsplitError(Exception):
    """Base class for all errors raised by bgsplit."""


class InputError(BgsplitError, ValueError):
    """Caller-supplied data is invalid: bad shapes, value ranges, or file content."""


class NumericError(BgsplitError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite values."""
