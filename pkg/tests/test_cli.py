import json

import pytest

from app.cli import main
from app.services.reporting import read_report_json


def test_run_writes_report_history_and_summary(tmp_path, capsys):
    out = tmp_path / "p2.json"
    code = main(["run", "--problem", "p2", "--size", "8", "--solver", "inb", "--out", str(out)])
    assert code == 0
    report = read_report_json(out)
    assert report.converged
    assert (tmp_path / "p2.csv").exists()

    problem, solver, n_ite, wall_time, n_sta, converged = capsys.readouterr().out.split()
    assert problem == report.problem
    assert solver == "inb"
    assert int(n_ite) == report.n_ite
    assert float(wall_time) >= 0.0
    assert int(n_sta) == report.n_sta
    assert converged == "true"


def test_run_maps_flags_onto_options(tmp_path):
    out = tmp_path / "p1.json"
    plot = tmp_path / "p1.dat"
    code = main([
        "run", "--problem", "p1", "--size", "10", "--solver", "ardn",
        "--gmax", "24", "--alpha-star", "0.06", "--weight-strategy", "simplified2",
        "--out", str(out), "--plot-data", str(plot),
    ])
    assert code == 0
    report = read_report_json(out)
    assert all(r.line_search_count <= 24 for r in report.history)
    assert len(plot.read_text().splitlines()) == report.n_ite + 1


def test_pinl_shorthand(tmp_path, capsys):
    out = tmp_path / "pinl.json"
    code = main([
        "run", "--problem", "p2", "--size", "8", "--pinl", "--inner", "ardn",
        "--train-size", "3", "--components", "1", "--out", str(out),
    ])
    assert code == 0
    assert read_report_json(out).solver == "pinl+ardn"


def test_unknown_problem_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--problem", "p9"])
    assert exc.value.code == 2


def test_invalid_size_or_option_is_a_usage_error(tmp_path, capsys):
    assert main(["run", "--problem", "p5", "--size", "10", "--out", str(tmp_path / "x.json")]) == 2
    assert main(["run", "--problem", "p5", "--size", "9", "--delta", "1.5"]) == 2
    assert "error" in capsys.readouterr().err


def test_sweep_exit_code_reflects_row_errors(tmp_path, capsys):
    good = tmp_path / "good.jsonl"
    good.write_text(json.dumps({"problem": "p2", "params": {"size": 8}, "solver": "inb"}) + "\n")
    assert main(["sweep", str(good), "--out", str(tmp_path / "good.csv")]) == 0

    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"problem": "p2", "params": {"size": 6}, "solver": "inb"}) + "\n")
    assert main(["sweep", str(bad), "--out", str(tmp_path / "bad.csv"), "--jobs", "2"]) == 1
    assert (tmp_path / "bad.csv").exists()


def test_history_subcommand(tmp_path):
    report_path = tmp_path / "r.json"
    main(["run", "--problem", "p2", "--size", "8", "--solver", "ardn", "--out", str(report_path)])
    plot = tmp_path / "r.dat"
    assert main(["history", str(report_path), "--out", str(plot)]) == 0
    assert plot.read_text().splitlines()[0].split()[0] == "0"


def test_solver_failure_still_writes_the_partial_report(tmp_path, capsys):
    out = tmp_path / "rank.json"
    code = main([
        "run", "--problem", "chemical", "--pinl", "--train-size", "3", "--components", "3",
        "--out", str(out),
    ])
    assert code == 1
    assert "RankDeficientError" in capsys.readouterr().err
    report = read_report_json(out)
    assert report.status == "aborted"
    assert report.solver == "pinl+inb"
    assert report.phases.training_iterations == 3
    assert (tmp_path / "rank.csv").exists()
