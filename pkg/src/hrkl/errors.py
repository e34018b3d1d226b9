"""Exception hierarchy shared across the package.

The CLI maps each family to an exit code: validation problems to 3,
numerical failures to 4.
"""


class HRKLError(Exception):
    pass


class ValidationError(HRKLError, ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """A data or grammar file could not be parsed.

    ``line`` is the 1-based line number of the offending row, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PlacementError(ValidationError):
    """Non-overlapping corruption sections could not be placed."""


class NumericError(HRKLError, ArithmeticError):
    """A covariance matrix could not be factorized or produced non-finite values."""


class FitError(NumericError):
    """Every optimizer restart failed for one (kernel, series) pair."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class SweepError(NumericError):
    """Too many cells of a BIC sweep failed."""
