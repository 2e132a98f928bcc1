"""Inexact Newton with backtracking: forcing terms, Armijo search, outer loop."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.models.schemas import IterationRecord, SolveReport, SolverOptions
from app.services.core import (
    NonlinearSystem,
    count_stagnant,
    is_stagnant,
    norm,
    resolve_beta,
    stopping_satisfied,
)
from app.services.errors import InvariantViolation, NonFiniteResidualError
from app.services.jacobian import jacobian_operator
from app.services.linalg import gmres

logger = logging.getLogger(__name__)

IterateCallback = Callable[[int, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class ForcingState:
    previous_residual_norm: float
    previous_linear_model_norm: float


@dataclass(frozen=True)
class LineSearchResult:
    step_length: float
    rejections: int
    satisfied: bool
    point: np.ndarray
    merit_initial: float
    merit_value: float


def forcing_term(
    state: ForcingState | None,
    current_norm: float,
    options: SolverOptions,
    beta: float,
) -> float:
    """Eisenstat-Walker choice: eta0 far from the root, the model mismatch near it."""
    if state is None or current_norm >= beta or state.previous_residual_norm == 0.0:
        return options.eta0
    eta = abs(current_norm - state.previous_linear_model_norm) / state.previous_residual_norm
    return float(min(max(eta, options.forcing_min), options.forcing_max))


def armijo_backtracking(
    merit: Callable[[np.ndarray], float],
    x: np.ndarray,
    direction: np.ndarray,
    directional_term: float,
    options: SolverOptions,
    *,
    initial_merit: float | None = None,
) -> LineSearchResult:
    """Backtrack lambda = rho^i, i = 0..g_max, until sufficient decrease holds.

    Trial points whose merit is not finite count as rejected. When every
    trial fails, the smallest step is returned with ``satisfied=False``.
    """
    f0 = merit(x) if initial_merit is None else initial_merit
    lam = 1.0
    point = x + lam * direction
    value = merit(point)
    for i in range(options.g_max + 1):
        if i > 0:
            lam *= options.backtrack_rho
            point = x + lam * direction
            value = merit(point)
        if np.isfinite(value) and value <= f0 + options.armijo_alpha * lam * directional_term:
            return LineSearchResult(lam, i, True, point, f0, value)
    return LineSearchResult(lam, options.g_max, False, point, f0, value)


class _MeritProbe:
    """Merit function that remembers the residual at the last point it saw."""

    def __init__(self, system: NonlinearSystem, merit_of_residual: Callable[[np.ndarray], float]):
        self._system = system
        self._merit_of_residual = merit_of_residual
        self.last_residual: np.ndarray | None = None

    def __call__(self, z: np.ndarray) -> float:
        fz = np.asarray(self._system.residual(z), dtype=float)
        if not np.all(np.isfinite(fz)):
            self.last_residual = None
            return float("inf")
        self.last_residual = fz
        return self._merit_of_residual(fz)


class InexactNewtonSolver:
    """Algorithm INB; subclasses change the merit through ``_prepare_weights``."""

    name = "inb"

    def __init__(
        self,
        system: NonlinearSystem,
        options: SolverOptions | None = None,
        preconditioner=None,
    ):
        self.system = system
        self.options = options or SolverOptions()
        self.preconditioner = preconditioner

    # hooks ---------------------------------------------------------------

    def _reset(self, x0: np.ndarray, f0: np.ndarray) -> None:
        pass

    def _prepare_weights(
        self, k: int, fx: np.ndarray, norm_k: float, norm_prev: float | None, g_prev: int | None
    ) -> np.ndarray | None:
        return None

    @staticmethod
    def merit(weights: np.ndarray | None, fx: np.ndarray) -> float:
        return 0.5 * float(fx @ fx)

    @staticmethod
    def directional_term(weights: np.ndarray | None, fx: np.ndarray, js: np.ndarray) -> float:
        return float(fx @ js)

    # loop ----------------------------------------------------------------

    def solve(
        self,
        x0: np.ndarray,
        *,
        max_iters: int | None = None,
        on_iterate: IterateCallback | None = None,
    ) -> SolveReport:
        opts = self.options
        system = self.system
        started = time.perf_counter()

        x = np.array(x0, dtype=float)
        if x.shape != (system.dimension,):
            raise ValueError(f"x0 has shape {x.shape}, expected ({system.dimension},)")
        fx = system.evaluate(x)
        norm0 = norm(fx)
        beta = resolve_beta(opts, norm0)
        limit = opts.max_newton_iters if max_iters is None else max_iters

        self._reset(x, fx)
        if on_iterate is not None:
            on_iterate(0, x, fx)

        history: list[IterationRecord] = []
        state: ForcingState | None = None
        norm_k = norm0
        norm_prev: float | None = None
        g_prev: int | None = None
        message: str | None = None
        aborted = False
        k = 0

        try:
            while not stopping_satisfied(norm_k, norm0, opts) and k < limit:
                eta = forcing_term(state, norm_k, opts, beta)
                weights = self._prepare_weights(k, fx, norm_k, norm_prev, g_prev)

                try:
                    jac = jacobian_operator(system, x, fx)
                except NonFiniteResidualError as exc:
                    aborted, message = True, f"iteration {k + 1}: {exc}"
                    break
                krylov = gmres(
                    jac, -fx, eta, opts.gmres_restart, opts.gmres_max_iters, self.preconditioner
                )
                step = krylov.solution
                if not np.all(np.isfinite(step)):
                    message = f"iteration {k + 1}: linear solve produced a non-finite step"
                    aborted = True
                    break

                js = np.asarray(jac.matvec(step), dtype=float).ravel()
                model_norm = norm(js + fx)
                if opts.verify and krylov.relative_residual <= eta:
                    if model_norm > eta * norm_k * (1.0 + 1e-8) + 1e-300:
                        raise InvariantViolation(
                            f"iteration {k + 1}: ||F'S + F|| = {model_norm:.6e} exceeds "
                            f"eta * ||F|| = {eta * norm_k:.6e}"
                        )

                directional = self.directional_term(weights, fx, js)
                probe = _MeritProbe(system, lambda fz, w=weights: self.merit(w, fz))
                search = armijo_backtracking(
                    probe, x, step, directional, opts, initial_merit=self.merit(weights, fx)
                )
                fx_new = probe.last_residual
                if fx_new is None:
                    message = f"iteration {k + 1}: non-finite residual at every trial step"
                    aborted = True
                    break

                norm_new = norm(fx_new)
                record = IterationRecord(
                    k=k + 1,
                    residual_norm=norm_new,
                    step_length=search.step_length,
                    line_search_count=search.rejections,
                    forcing_term=eta,
                    stagnant=is_stagnant(norm_new, norm_k, opts.stagnation_tau),
                    weight_min=float(weights.min()) if weights is not None else None,
                    weight_max=float(weights.max()) if weights is not None else None,
                    armijo_satisfied=search.satisfied,
                    merit_before=search.merit_initial,
                    merit_after=search.merit_value,
                    directional_term=directional,
                    linear_iterations=krylov.iterations,
                    linear_relative_residual=krylov.relative_residual,
                    linear_model_norm=model_norm,
                )
                history.append(record)
                logger.debug(
                    "%s k=%d |F|=%.6e eta=%.3e lambda=%.3e g=%d stagnant=%s",
                    self.name, record.k, norm_new, eta, search.step_length,
                    search.rejections, record.stagnant,
                )

                state = ForcingState(norm_k, model_norm)
                norm_prev, g_prev = norm_k, search.rejections
                x, fx, norm_k = search.point, fx_new, norm_new
                k += 1
                if on_iterate is not None:
                    on_iterate(k, x, fx)
        except InvariantViolation as exc:
            exc.report = self._report(
                "aborted", history, x, norm0, norm_k, started, f"invariant violated: {exc}"
            )
            raise

        converged = not aborted and stopping_satisfied(norm_k, norm0, opts)
        status = "converged" if converged else ("aborted" if aborted else "max_iterations")
        return self._report(status, history, x, norm0, norm_k, started, message)

    def _report(
        self,
        status: str,
        history: list[IterationRecord],
        x: np.ndarray,
        norm0: float,
        norm_k: float,
        started: float,
        message: str | None,
    ) -> SolveReport:
        report = SolveReport(
            problem=self.system.name,
            solver=self.name,
            status=status,
            converged=status == "converged",
            n_ite=len(history),
            wall_time=time.perf_counter() - started,
            n_sta=count_stagnant(history),
            initial_residual_norm=norm0,
            final_residual_norm=norm_k,
            final_point=x.tolist(),
            history=history,
            message=message,
        )
        logger.info(
            "%s on %s: %s N_ite=%d N_sta=%d T=%.4fs |F|=%.3e",
            self.name, self.system.name, status, report.n_ite, report.n_sta,
            report.wall_time, norm_k,
        )
        return report


def inb_solve(
    system: NonlinearSystem,
    x0: np.ndarray,
    options: SolverOptions | None = None,
    preconditioner=None,
) -> SolveReport:
    return InexactNewtonSolver(system, options, preconditioner).solve(x0)
