"""Exception hierarchy.

Each class carries the process exit code used by the command-line front end.
"""


class NonlocalError(Exception):
    exit_code = 1


class ConfigurationError(NonlocalError, ValueError):
    """Invalid parameters: out-of-range values, unsupported combinations."""

    exit_code = 1


class DomainError(NonlocalError, ValueError):
    """An input function violates a sign or support requirement."""

    exit_code = 1


class InsufficientDataError(NonlocalError, ValueError):
    """Too few samples to fit an exponent or a rate."""

    exit_code = 1


class ConvergenceError(NonlocalError, RuntimeError):
    """An iteration failed to reach its tolerance within its budget."""

    exit_code = 2


class AccuracyError(ConvergenceError):
    """A quadrature could not certify the requested tolerance.

    ``achieved`` holds the error bound that was reached.
    """

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


class BracketError(ConvergenceError):
    """No sign change found while bracketing a root."""


class OracleMismatch(NonlocalError, AssertionError):
    """A reference computation disagrees with the main implementation."""

    exit_code = 3
