"""Persisting solve reports: JSON, per-iteration CSV and plot-ready history."""

from __future__ import annotations

import csv
from pathlib import Path

from app.models.schemas import SolveReport

HISTORY_COLUMNS = [
    "k", "residual_norm", "step_length", "line_search_count", "forcing_term", "stagnant",
]


def write_report_json(report: SolveReport, path: str | Path) -> None:
    Path(path).write_text(report.model_dump_json(indent=2), encoding="utf-8")


def read_report_json(path: str | Path) -> SolveReport:
    return SolveReport.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_history_csv(report: SolveReport, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=HISTORY_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for record in report.history:
            writer.writerow(record.model_dump(include=set(HISTORY_COLUMNS)))


def history_plot_rows(report: SolveReport) -> list[tuple]:
    """(k, ||F||) pairs, or (phase, k, ||F||) triples for PIN^L reports.

    Plain histories start at k = 0 with the initial residual norm. PIN^L
    training rows are indexed from 0, subspace and global rows from 1.
    """
    if report.phases is None:
        rows: list[tuple] = [(0, report.initial_residual_norm)]
        rows.extend((r.k, r.residual_norm) for r in report.history)
        return rows

    phases = report.phases
    rows = [("training", k, v) for k, v in enumerate(phases.training_residual_norms)]
    rows.extend(("subspace", k, v) for k, v in enumerate(phases.subspace_residual_norms, start=1))
    if not phases.training_converged:
        rows.extend(("global", r.k, r.residual_norm) for r in report.history)
    return rows


def emit_history_plot_data(report: SolveReport, path: str | Path) -> None:
    """Whitespace-separated rows, one per line, for gnuplot-style plotting."""
    lines = []
    for row in history_plot_rows(report):
        *labels, value = row
        lines.append(" ".join([*(str(x) for x in labels), f"{value:.16e}"]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
