"""Preconditioned inexact Newton with learning (PCA subspace initial guess)."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from app.models.schemas import InnerSolverName, PhaseSummary, SolveReport, SolverOptions
from app.services.ardn import AdaptiveResidualNewtonSolver
from app.services.core import NonlinearSystem, norm
from app.services.errors import NonFiniteResidualError, RankDeficientError, SingularMatrixError
from app.services.inb import InexactNewtonSolver
from app.services.jacobian import jacobian_vector_product
from app.services.linalg import ProjectorPair, dense_solve, truncated_left_singular_vectors

logger = logging.getLogger(__name__)

INNER_SOLVERS: dict[str, type[InexactNewtonSolver]] = {
    "inb": InexactNewtonSolver,
    "ardn": AdaptiveResidualNewtonSolver,
}


@dataclass
class TrainingData:
    R: np.ndarray
    S: np.ndarray
    residual_mean: np.ndarray
    solution_mean: np.ndarray
    last_iterate: np.ndarray
    residual_norms: list[float]
    report: SolveReport
    # the inner solver met the stopping rule during training
    converged_early: bool = False


@dataclass
class SubspaceResult:
    y_star: np.ndarray
    iterations: int
    residual_norms: list[float] = field(default_factory=list)
    fallback: bool = False
    converged: bool = False
    floor: float = 0.0


def _inner_solver(inner: InnerSolverName, system: NonlinearSystem, options: SolverOptions):
    try:
        return INNER_SOLVERS[inner](system, options)
    except KeyError:
        raise ValueError(f"unknown inner solver {inner!r}; expected one of {sorted(INNER_SOLVERS)}")


def collect_training_data(
    inner: InnerSolverName,
    system: NonlinearSystem,
    x0: np.ndarray,
    s: int,
    options: SolverOptions | None = None,
) -> TrainingData:
    """Run s - 1 inner steps and center the iterates X^0..X^{s-1} and residuals."""
    if s < 1:
        raise ValueError("training size s must be at least 1")
    options = options or SolverOptions()
    points: list[np.ndarray] = []
    residuals: list[np.ndarray] = []

    def keep(_k: int, x: np.ndarray, fx: np.ndarray) -> None:
        points.append(x.copy())
        residuals.append(fx.copy())

    report = _inner_solver(inner, system, options).solve(x0, max_iters=s - 1, on_iterate=keep)

    X = np.column_stack(points)
    F = np.column_stack(residuals)
    solution_mean = X.mean(axis=1)
    residual_mean = F.mean(axis=1)
    return TrainingData(
        R=F - residual_mean[:, None],
        S=X - solution_mean[:, None],
        residual_mean=residual_mean,
        solution_mean=solution_mean,
        last_iterate=points[-1],
        residual_norms=[norm(f) for f in residuals],
        report=report,
        converged_early=report.converged,
    )


def build_projectors(data: TrainingData, d: int) -> ProjectorPair:
    return ProjectorPair(
        P=truncated_left_singular_vectors(data.R, d),
        Q=truncated_left_singular_vectors(data.S, d),
        residual_mean=data.residual_mean,
        solution_mean=data.solution_mean,
    )


def subspace_newton(
    system: NonlinearSystem,
    proj: ProjectorPair,
    y0: np.ndarray,
    gamma_s: float,
    max_iters: int,
) -> SubspaceResult:
    """Full Newton steps on P^T F(Y) = 0 restricted to Y = Y^0 + span(Q).

    Stops once ||PP^T(F(Y) - F_bar) + F_bar|| <= gamma_s times its initial
    value. Since (I - PP^T) F_bar never changes, that norm cannot drop below
    ``floor``; a target under the floor is unreachable and the phase runs to
    ``max_iters``.

    The returned point is the last iterate when the target is met without
    raising ||F|| above ||F(y0)||. Otherwise it is the iterate with the
    smallest ||F||, which is y0 itself (``fallback`` set) when no step
    improved on it. A singular projected Jacobian or a non-finite residual
    stops the phase with the same choice.
    """
    P, Q = proj.P, proj.Q
    y = np.array(y0, dtype=float)
    fy = system.evaluate(y)
    start_norm = norm(fy)
    target = gamma_s * norm(proj.approximate_residual(fy))
    floor = norm(proj.residual_mean - P @ (P.T @ proj.residual_mean))
    if floor > target:
        logger.warning(
            "subspace target %.3e lies below the projection floor %.3e", target, floor
        )

    best_y, best_norm = y, start_norm
    norms: list[float] = []
    iterations = 0
    reached = False

    try:
        while iterations < max_iters:
            if norm(proj.approximate_residual(fy)) <= target:
                reached = True
                break
            # d products F'(Y) q_j, then the left projection by P^T
            jq = np.column_stack(
                [jacobian_vector_product(system, y, Q[:, j], fy) for j in range(Q.shape[1])]
            )
            step = dense_solve(P.T @ jq, -(P.T @ fy))
            y = y + Q @ step
            fy = system.evaluate(y)
            iterations += 1
            norms.append(norm(fy))
            if norms[-1] < best_norm:
                best_y, best_norm = y, norms[-1]
            logger.debug(
                "subspace j=%d |F|=%.6e |F_approx|=%.6e",
                iterations, norms[-1], norm(proj.approximate_residual(fy)),
            )
        else:
            reached = norm(proj.approximate_residual(fy)) <= target
    except (SingularMatrixError, NonFiniteResidualError) as exc:
        logger.warning("subspace Newton abandoned after %d iterations: %s", iterations, exc)

    if reached and norm(fy) <= start_norm:
        return SubspaceResult(y, iterations, norms, converged=True, floor=floor)
    if best_y is not y:
        logger.warning("subspace Newton kept its best iterate |F|=%.3e", best_norm)
    return SubspaceResult(
        np.array(best_y, dtype=float), iterations, norms,
        fallback=best_norm >= start_norm, converged=reached, floor=floor,
    )


def pinl_solve(
    system: NonlinearSystem,
    x0: np.ndarray,
    options: SolverOptions | None = None,
    inner: InnerSolverName = "inb",
    training_system: NonlinearSystem | None = None,
) -> SolveReport:
    """Training, projector construction, subspace solve, then a global solve.

    ``training_system`` lets the data come from a cheaper related problem of
    the same dimension; by default the target system is used.
    """
    options = options or SolverOptions()
    s, d = options.pinl_training_size, options.pinl_components
    source = training_system or system
    if source.dimension != system.dimension:
        raise ValueError("training system must have the same dimension as the target system")

    started = time.perf_counter()
    data = collect_training_data(inner, source, x0, s, options)
    training_time = time.perf_counter() - started

    if data.converged_early and training_system is None:
        report = data.report.model_copy(
            update={
                "solver": f"pinl+{inner}",
                "phases": PhaseSummary(
                    inner=inner,
                    training_iterations=len(data.residual_norms),
                    subspace_iterations=0,
                    global_iterations=0,
                    training_residual_norms=data.residual_norms,
                    training_converged=True,
                    training_time=training_time,
                ),
                "message": "converged during training; no preconditioning applied",
            }
        )
        logger.info("pinl: %s converged during training", system.name)
        return report

    phase_start = time.perf_counter()
    try:
        proj = build_projectors(data, d)
    except RankDeficientError as exc:
        exc.report = data.report.model_copy(
            update={
                "problem": system.name,
                "solver": f"pinl+{inner}",
                "status": "aborted",
                "converged": False,
                "message": f"projector construction failed: {exc}",
                "phases": PhaseSummary(
                    inner=inner,
                    training_iterations=len(data.residual_norms),
                    subspace_iterations=0,
                    global_iterations=0,
                    training_residual_norms=data.residual_norms,
                    training_time=training_time,
                ),
            }
        )
        raise
    subspace = subspace_newton(
        system, proj, data.last_iterate,
        options.pinl_subspace_rel_tol, options.pinl_subspace_max_iters,
    )
    subspace_time = time.perf_counter() - phase_start
    logger.info(
        "pinl: training %d samples, subspace %d iterations%s",
        len(data.residual_norms), subspace.iterations,
        " (fell back to the last training iterate)" if subspace.fallback else "",
    )

    # a fresh solver restarts ARDN weights at their initial values
    global_report = _inner_solver(inner, system, options).solve(subspace.y_star)
    total = time.perf_counter() - started

    return global_report.model_copy(
        update={
            "solver": f"pinl+{inner}",
            "wall_time": total,
            "phases": PhaseSummary(
                inner=inner,
                training_iterations=len(data.residual_norms),
                subspace_iterations=subspace.iterations,
                global_iterations=global_report.n_ite,
                training_residual_norms=data.residual_norms,
                subspace_residual_norms=subspace.residual_norms,
                subspace_fallback=subspace.fallback,
                subspace_converged=subspace.converged,
                subspace_floor=subspace.floor,
                training_time=training_time,
                subspace_time=subspace_time,
                global_time=global_report.wall_time,
            ),
        }
    )
