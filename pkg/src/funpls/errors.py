"""Exception types raised across the package."""


class FunplsError(Exception):
    """Base class for all package errors."""


class GridMismatchError(FunplsError, ValueError):
    """Operands live on different grids."""


class NotPSDError(FunplsError, ValueError):
    """A quadratic form that should be nonnegative is substantially negative."""


class RankError(FunplsError, ArithmeticError):
    """A direction became numerically degenerate during orthogonalization or deflation.

    Attributes
    ----------
    index : int
        1-based position of the offending vector, component or step.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class IllConditionedError(FunplsError, ArithmeticError):
    """The raw Krylov system is too close to singular to solve reliably.

    The diagnostics computed before giving up are attached so callers can
    report the condition estimate and smallest eigenvalue.
    """

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class SingularityError(FunplsError, ArithmeticError):
    """A population quantity is singular by construction (e.g. p beyond the model rank)."""


class SpecError(FunplsError, ValueError):
    """A simulation, rate or model specification is malformed."""
