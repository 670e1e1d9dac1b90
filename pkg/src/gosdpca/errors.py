"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an operation receives arguments violating its preconditions."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget.

    Carries the last iterate on ``last_fit`` so callers can inspect or
    salvage a partial result.
    """

    def __init__(self, message, last_fit=None):
        super().__init__(message)
        self.last_fit = last_fit


class ConfigError(InputError):
    """Raised when an experiment configuration fails validation."""
