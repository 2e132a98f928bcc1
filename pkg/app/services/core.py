"""Shared domain types and the stopping / stagnation tests used by every solver."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
import scipy.sparse as sps

from app.models.schemas import IterationRecord, SolverOptions
from app.services.errors import NonFiniteResidualError

Vector = np.ndarray
ResidualFn = Callable[[Vector], Vector]
JacobianFn = Callable[[Vector], "np.ndarray | sps.spmatrix"]
JvpFn = Callable[[Vector, Vector], Vector]


class JacobianKind(str, Enum):
    MATRIX = "matrix"
    MATVEC = "matvec"
    FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True)
class NonlinearSystem:
    """F: R^n -> R^n together with a way to obtain F'.

    ``jacobian`` returns a dense or scipy.sparse matrix (kind MATRIX),
    ``jvp(x, v)`` returns F'(x) v (kind MATVEC). Finite-difference systems
    carry neither. Evaluators must not keep hidden mutable state.
    """

    name: str
    dimension: int
    residual: ResidualFn
    kind: JacobianKind = JacobianKind.FINITE_DIFFERENCE
    jacobian: JacobianFn | None = None
    jvp: JvpFn | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.kind is JacobianKind.MATRIX and self.jacobian is None:
            raise ValueError(f"{self.name}: kind 'matrix' needs a jacobian callable")
        if self.kind is JacobianKind.MATVEC and self.jvp is None:
            raise ValueError(f"{self.name}: kind 'matvec' needs a jvp callable")

    def evaluate(self, x: Vector) -> Vector:
        """Residual at x, checked for length and finiteness."""
        fx = np.asarray(self.residual(np.asarray(x, dtype=float)), dtype=float)
        if fx.shape != (self.dimension,):
            raise ValueError(
                f"{self.name}: residual has shape {fx.shape}, expected ({self.dimension},)"
            )
        if not np.all(np.isfinite(fx)):
            raise NonFiniteResidualError(f"{self.name}: non-finite residual")
        return fx


def norm(v: Vector) -> float:
    return float(np.linalg.norm(v))


def stopping_satisfied(current_norm: float, initial_norm: float, options: SolverOptions) -> bool:
    """||F(X^k)|| <= max(abs_tol, rel_tol * ||F(X^0)||)."""
    return current_norm <= max(options.abs_tol, options.rel_tol * initial_norm)


def is_stagnant(norm_k: float, norm_km1: float, tau: float) -> bool:
    """A step stagnates when | ||F^k|| - ||F^{k-1}|| | <= tau * ||F^k||.

    A zero current norm means convergence and is never counted as stagnation.
    """
    if norm_k == 0.0:
        return False
    return abs(norm_k - norm_km1) <= tau * norm_k


def count_stagnant(history: list[IterationRecord]) -> int:
    return sum(1 for record in history if record.stagnant)


def resolve_beta(options: SolverOptions, initial_norm: float) -> float:
    if options.beta is not None:
        return options.beta
    return options.beta_factor * initial_norm


def initial_weight_vector(options: SolverOptions, dimension: int) -> Vector:
    if options.initial_weights is None:
        return np.ones(dimension)
    weights = np.asarray(options.initial_weights, dtype=float)
    if weights.shape != (dimension,):
        raise ValueError(
            f"initial_weights has length {weights.size}, system dimension is {dimension}"
        )
    return weights
