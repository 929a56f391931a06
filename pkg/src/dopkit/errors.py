"""Exception hierarchy shared by every dopkit module."""


class DopkitError(Exception):
    """Base class for all dopkit failures."""


class ConfigurationError(DopkitError, ValueError):
    """Invalid parameters, malformed configuration or unmet preconditions."""


class NumericError(DopkitError, ArithmeticError):
    """A numerical procedure failed to converge or produced garbage."""


class PrecisionError(NumericError):
    """Working precision was insufficient.

    ``step`` carries the recurrence index (or other counter) at which the
    failure was detected so callers can retry with more bits.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class PoleError(NumericError):
    """Evaluation requested exactly at a pole (a node of orthogonality)."""


class PreconditionError(ConfigurationError):
    """An operation was called outside the region where it is defined."""
