"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so keep the grouping stable.
"""


class SrbbError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SrbbError, ValueError):
    pass


class DegenerateInput(SrbbError, ValueError):
    pass


class ResourceLimit(SrbbError, RuntimeError):
    pass


class NumericFailure(SrbbError, RuntimeError):
    """Raised when an iterative method fails; ``state`` carries the last iterate."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class SupercriticalInput(InvalidArgument):
    pass


class SeriesDivergence(NumericFailure):
    pass


class ChecksumError(SrbbError):
    pass


class ConfigError(SrbbError):
    pass
