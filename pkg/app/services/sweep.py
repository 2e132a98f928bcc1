"""Manifest-driven sweeps: one solve per JSONL row, aggregated into a CSV."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable

from pydantic import ValidationError

from app.models.schemas import SweepResult, SweepRow
from app.services.errors import SolverError
from app.services.registry import ProblemRegistry, registry as default_registry
from app.services.runner import build_options, run_solver

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "row", "problem", "params", "solver", "inner", "options",
    "N_ite", "T", "N_sta", "converged", "status", "error",
]


def read_manifest(path: str | Path) -> list[SweepRow]:
    """One JSON object per non-blank line; '#' starts a comment line."""
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append(SweepRow.model_validate(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                raise ValueError(f"{path}:{lineno}: invalid manifest row: {e}") from e
    return rows


def run_row(index: int, row: SweepRow, registry: ProblemRegistry = default_registry) -> SweepResult:
    """Solve one manifest row; failures are captured in the result, never raised."""
    base = SweepResult(
        row=index,
        problem=row.problem,
        params=row.params,
        solver=row.solver,
        inner=row.inner if row.solver == "pinl" else None,
        options=row.options,
    )
    try:
        bench = registry.load(row.problem, row.params)
        report = run_solver(bench, row.solver, build_options(bench, row.options), row.inner)
    except (KeyError, ValueError, ValidationError, SolverError) as e:
        logger.warning("sweep row %d (%s/%s) failed: %s", index, row.problem, row.solver, e)
        return base.model_copy(update={"error": f"{type(e).__name__}: {e}"})

    return base.model_copy(
        update={
            "n_ite": report.n_ite,
            "wall_time": report.wall_time,
            "n_sta": report.n_sta,
            "converged": report.converged,
            "status": report.status,
        }
    )


def run_sweep(
    rows: Iterable[SweepRow],
    jobs: int = 1,
    registry: ProblemRegistry = default_registry,
) -> list[SweepResult]:
    """Run every row with at most ``jobs`` concurrent solves; output keeps row order."""
    rows = list(rows)
    if not rows:
        return []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda pair: run_row(*pair, registry=registry), enumerate(rows)))
    failed = sum(1 for r in results if r.error)
    logger.info("sweep: %d rows, %d errored", len(results), failed)
    return results


def write_sweep_csv(results: Iterable[SweepResult], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for r in results:
            writer.writerow({
                "row": r.row,
                "problem": r.problem,
                "params": json.dumps(r.params, sort_keys=True),
                "solver": r.solver,
                "inner": r.inner or "",
                "options": json.dumps(r.options, sort_keys=True),
                "N_ite": "" if r.n_ite is None else r.n_ite,
                "T": "" if r.wall_time is None else f"{r.wall_time:.6f}",
                "N_sta": "" if r.n_sta is None else r.n_sta,
                "converged": "" if r.converged is None else r.converged,
                "status": r.status or "",
                "error": r.error or "",
            })
