"""Shared exception types.

Callers can distinguish bad inputs (DomainError, ExistenceError) from
numerical failures (ConvergenceError, FittingError) without string matching.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ExistenceError(ValueError):
    """A requested quantity does not exist for the given parameters.

    The message names the violated bound, e.g. a moment order outside its
    existence window or a Lorenz curve for a distribution without a mean.
    """


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap; message carries the residual."""


class FittingError(RuntimeError):
    """A fit cannot be attempted, e.g. degenerate input data."""
