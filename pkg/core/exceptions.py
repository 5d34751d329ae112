"""Error hierarchy for the inversion package.

Every error is also a builtin (``ValueError``, ``RuntimeError`` ...) so callers
that only know the builtin types keep working.
"""


class InversionError(Exception):
    """Base class for all errors raised by the package."""


class InvalidArgumentError(InversionError, ValueError):
    """An argument violates the documented preconditions."""


class GridMismatchError(InvalidArgumentError):
    """Two fields that must share a grid do not."""


class PhysicalityError(InversionError, ArithmeticError):
    """A quantity the theory guarantees positive came out nonpositive."""


class SolverError(InversionError, RuntimeError):
    """A linear solve failed or produced non-finite values."""


class InfeasibleConstraintError(InvalidArgumentError):
    """The boundary lift alone already violates the ball constraint."""


class StepSizeError(InversionError, RuntimeError):
    """Gradient descent diverged for the frozen step size."""


class ConfigError(InvalidArgumentError):
    """An experiment configuration failed strict validation."""


class DataSourceError(InversionError, ValueError):
    """A data table could not be read or parsed."""
