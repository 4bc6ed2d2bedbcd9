"""Error taxonomy shared by every module.

Three hard families (domain, numeric, config) plus a soft truncation flag
carried in result metadata rather than raised.
"""


class StableKernError(Exception):
    """Base class for all package errors."""


class DomainError(StableKernError, ValueError):
    """Arguments outside the mathematical domain of an operation."""


class NumericsError(StableKernError, ArithmeticError):
    """A quadrature/iteration failed to reach the requested tolerance.

    Carries the best achieved error estimate so callers can report it.
    """

    def __init__(self, message, achieved_error=None):
        if achieved_error is not None:
            message = f"{message} (achieved error ~ {achieved_error:.3e})"
        super().__init__(message)
        self.achieved_error = achieved_error


class ConfigError(StableKernError, ValueError):
    """Invalid experiment configuration (CLI/config-file level)."""
