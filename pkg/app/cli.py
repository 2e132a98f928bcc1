"""Command-line driver: ``newton-forge run | sweep | history | serve``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from app.config import LOG_LEVELS, configure_logging
from app.models.schemas import SolveReport
from app.services.errors import SolverError
from app.services.registry import PROBLEMS, UnknownProblemError, registry
from app.services.reporting import (
    emit_history_plot_data,
    read_report_json,
    write_history_csv,
    write_report_json,
)
from app.services.runner import SOLVERS, build_options, run_solver
from app.services.sweep import read_manifest, run_sweep, write_sweep_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# CLI flag dest -> SolverOptions field
OPTION_FLAGS = {
    "gmax": "g_max",
    "alpha_star": "initial_learning_rate",
    "sigma1": "sigma1",
    "sigma2": "sigma2",
    "delta": "base_decay",
    "weight_strategy": "weight_strategy",
    "train_size": "pinl_training_size",
    "components": "pinl_components",
    "subspace_rtol": "pinl_subspace_rel_tol",
    "atol": "abs_tol",
    "rtol": "rel_tol",
    "max_iters": "max_newton_iters",
    "stagnation_tau": "stagnation_tau",
    "restart": "gmres_restart",
    "verify": "verify",
}


def _problem_params(args: argparse.Namespace) -> dict:
    params = {}
    if args.problem == "convdiff":
        if args.c is not None:
            params["c"] = args.c
        if args.grid is not None:
            params["grid"] = args.grid
    elif args.problem != "chemical" and args.size is not None:
        params["size"] = args.size
    return params


def _option_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for flag, field_name in OPTION_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None and value is not False:
            overrides[field_name] = value
    return overrides


def cmd_run(args: argparse.Namespace) -> int:
    solver = "pinl" if args.pinl else args.solver
    try:
        bench = registry.load(args.problem, _problem_params(args))
        options = build_options(bench, _option_overrides(args))
    except UnknownProblemError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        report = run_solver(bench, solver, options, args.inner)
    except SolverError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        if e.report is not None:
            _write_outputs(e.report, args, bench.id)
        return EXIT_FAILURE

    _write_outputs(report, args, bench.id)
    print(
        f"{report.problem} {report.solver} {report.n_ite} {report.wall_time:.4f} "
        f"{report.n_sta} {str(report.converged).lower()}"
    )
    if report.status == "aborted":
        print(f"aborted: {report.message}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _write_outputs(report: SolveReport, args: argparse.Namespace, problem_id: str) -> None:
    out = Path(args.out or f"{problem_id}_{report.solver}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_report_json(report, out)
    write_history_csv(report, out.with_suffix(".csv"))
    if args.plot_data:
        emit_history_plot_data(report, args.plot_data)


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        rows = read_manifest(args.manifest)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    results = run_sweep(rows, jobs=args.jobs)
    out = Path(args.out or Path(args.manifest).with_suffix(".csv").name)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(results, out)

    errored = sum(1 for r in results if r.error)
    print(f"{len(results)} rows written to {out}; {errored} errored")
    return EXIT_FAILURE if errored else EXIT_OK


def cmd_history(args: argparse.Namespace) -> int:
    try:
        report = read_report_json(args.report)
    except (OSError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    emit_history_plot_data(report, args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, reload=args.reload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newton-forge",
        description=(
            "Inexact Newton, adaptive-weight and PCA-preconditioned solvers on benchmark systems."
        ),
    )
    parser.add_argument(
        "--log-level", choices=sorted(LOG_LEVELS),
        help="Overrides NEWTON_FORGE_LOG (quiet, summary, trace)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Solve one (problem, solver, options) triple")
    run.add_argument("--problem", required=True, choices=list(PROBLEMS))
    run.add_argument("--size", type=int, help="Dimension for p1-p5")
    run.add_argument("--c", type=float, help="Convection coefficient for convdiff")
    run.add_argument("--grid", type=int, help="Interior nodes per side for convdiff")
    run.add_argument("--solver", choices=SOLVERS, default="ardn")
    run.add_argument("--pinl", action="store_true", help="Shorthand for --solver pinl")
    run.add_argument("--inner", choices=("inb", "ardn"), default="inb")
    run.add_argument("--gmax", type=int)
    run.add_argument("--alpha-star", type=float)
    run.add_argument("--sigma1", type=float)
    run.add_argument("--sigma2", type=float)
    run.add_argument("--delta", type=float)
    run.add_argument("--weight-strategy", choices=("full", "simplified1", "simplified2"))
    run.add_argument("--train-size", type=int)
    run.add_argument("--components", type=int)
    run.add_argument("--subspace-rtol", type=float)
    run.add_argument("--atol", type=float)
    run.add_argument("--rtol", type=float)
    run.add_argument("--max-iters", type=int)
    run.add_argument("--stagnation-tau", type=float)
    run.add_argument("--restart", type=int)
    run.add_argument("--verify", action="store_true", help="Check solver invariants every step")
    run.add_argument("--out", help="Report JSON path; the history CSV goes alongside")
    run.add_argument("--plot-data", help="Also write a whitespace-separated residual history")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="Run every row of a JSONL manifest")
    sweep.add_argument("manifest")
    sweep.add_argument("--out", help="Aggregate CSV path (default: <manifest>.csv)")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)

    history = sub.add_parser("history", help="Convert a report JSON into plot data")
    history.add_argument("report")
    history.add_argument("--out", required=True)
    history.set_defaults(func=cmd_history)

    serve = sub.add_parser("serve", help="Start the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--reload", action="store_true")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(LOG_LEVELS[args.log_level] if args.log_level else None)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
