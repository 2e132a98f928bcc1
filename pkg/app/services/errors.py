from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from app.models.schemas import SolveReport


class SolverError(Exception):
    """Base class for failures raised by the solver stack.

    ``report`` holds the partial result when the failure happened mid-solve.
    """

    def __init__(self, message: str, report: SolveReport | None = None):
        super().__init__(message)
        self.report = report


class NonFiniteResidualError(SolverError):
    """A residual evaluation produced NaN or inf."""


class SingularMatrixError(SolverError):
    """A dense factorization met a pivot below the singularity threshold."""


class RankDeficientError(SolverError):
    """A data matrix has fewer significant singular values than requested."""


class InvariantViolation(SolverError):
    """A checked invariant failed while running in verify mode."""
