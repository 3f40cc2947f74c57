"""Exception types raised across the toolkit."""


class SbmError(Exception):
    """Base class for toolkit errors."""


class DomainError(SbmError, ValueError):
    """An argument lies outside the domain of the evaluated object."""


class RangeError(SbmError, ValueError):
    """A lookup fell outside a tabulated range."""


class UnsupportedError(SbmError):
    """The requested operation is not available for this configuration."""


class NumericError(SbmError, ArithmeticError):
    """A numerical procedure failed to converge or became unstable.

    ``iterates`` holds the last values produced before giving up, when the
    procedure has them.
    """

    def __init__(self, message, iterates=None):
        super().__init__(message)
        self.iterates = iterates


class ReliabilityError(SbmError):
    """A Monte Carlo run did not meet its reliability requirements."""


class CoverageError(SbmError, KeyError):
    """A lookup table does not contain the requested point."""


class SingularInputError(SbmError, ValueError):
    """The input sits on a singularity of the evaluated expression."""
