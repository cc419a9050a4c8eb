"""Exception hierarchy."""


class PTStableError(Exception):
    """Base class for library errors."""


class DomainError(PTStableError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidMeasureError(PTStableError):
    """The Rosinski measure does not generate a Levy measure."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NotProperError(PTStableError):
    """The operation needs a proper tempered stable law."""


class MomentInfiniteError(PTStableError):
    """The requested moment or cumulant does not exist."""


class UnsupportedParameterError(PTStableError):
    """The parameter combination has no decision procedure here."""


class InsufficientSamplesError(PTStableError, ValueError):
    """Not enough (or degenerate) data for an estimator."""


class ParseError(PTStableError, ValueError):
    """A parameter file could not be parsed."""
