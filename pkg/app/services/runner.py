"""Dispatch a benchmark to INB, ARDN or PIN^L."""

from __future__ import annotations

from typing import Any

from app.models.schemas import SolveReport, SolverOptions
from app.services.ardn import ardn_solve
from app.services.inb import inb_solve
from app.services.pinl import INNER_SOLVERS, pinl_solve
from app.services.problems import BenchmarkProblem

SOLVERS = ("inb", "ardn", "pinl")


class UnknownSolverError(KeyError):
    pass


def build_options(
    bench: BenchmarkProblem, overrides: dict[str, Any] | None = None
) -> SolverOptions:
    """The problem's recommended options with ``overrides`` applied on top.

    Goes through validation again, so a bad override raises ValidationError.
    """
    return bench.recommended_options(**(overrides or {}))


def run_solver(
    bench: BenchmarkProblem,
    solver: str,
    options: SolverOptions | None = None,
    inner: str = "inb",
) -> SolveReport:
    if solver not in SOLVERS:
        raise UnknownSolverError(f"unknown solver {solver!r}; expected one of {', '.join(SOLVERS)}")
    if solver == "pinl" and inner not in INNER_SOLVERS:
        raise UnknownSolverError(
            f"unknown inner solver {inner!r}; expected one of {', '.join(INNER_SOLVERS)}"
        )
    options = options or bench.recommended_options()
    x0 = bench.initial_guess.copy()

    if solver == "inb":
        return inb_solve(bench.system, x0, options)
    if solver == "ardn":
        return ardn_solve(bench.system, x0, options)
    return pinl_solve(bench.system, x0, options, inner=inner)
