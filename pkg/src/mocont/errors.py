"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MocontError(Exception):
    """Base class for every error raised by :mod:`mocont`."""


class SingularMatrix(MocontError):
    """A pivot fell below the pivot tolerance during LU factorization."""


class SingularHessian(SingularMatrix):
    """The (reduced) Hessian is singular at the current point.

    The continuation driver turns this into a branch termination rather than
    a crash.
    """


class ZeroDeterminant(SingularHessian):
    """Orientation could not be decided because the determinant vanishes."""


class ZeroDirection(MocontError):
    """A predictor direction with zero norm was supplied."""


class UnknownProblem(MocontError, KeyError):
    """The requested problem identifier is not in the library."""

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class InconsistentData(MocontError, ValueError):
    """Trajectory or dataset arrays disagree in shape or spacing."""


class ShapeMismatch(MocontError, ValueError):
    """Layer widths do not match the supplied dataset."""


class DimensionMismatch(MocontError, ValueError):
    """Vector length does not fit the active set it is paired with."""


class TooManyInactive(MocontError):
    """Enumerating 2**n0 subdifferential vertices would be too expensive."""


class EmptyActiveSet(MocontError):
    """An operation needs at least one active index but found none."""


class TooManyPotentiallyActive(MocontError):
    """The candidate enumeration at a kink exceeds the ``p_max`` cap."""


class NotConverged(MocontError):
    """The corrector SQP did not reach the requested tolerances."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class InfeasibleSigns(NotConverged):
    """Sign constraints of the corrector were inconsistent at every iterate."""


class DegenerateBreakpoint(MocontError):
    """Two homotopy events coincide; kept for callers that want to raise."""


class BudgetExceeded(MocontError):
    """A brute-force oracle would evaluate more nodes than allowed."""


class NotFound(MocontError):
    """No new component start was located within the restart budget."""
