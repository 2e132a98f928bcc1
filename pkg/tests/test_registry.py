import pytest
from pydantic import ValidationError

from app.services.registry import ProblemRegistry, UnknownProblemError
from app.services.runner import UnknownSolverError, build_options, run_solver


def test_load_caches_by_parameters():
    registry = ProblemRegistry()
    first = registry.load("p3", {"size": 10})
    assert registry.load("p3", {"size": 10}) is first
    assert registry.load("p3", {"size": 10.0}) is first
    assert registry.load("p3", {"size": 12}) is not first


def test_defaults_fill_missing_parameters():
    registry = ProblemRegistry()
    assert registry.load("p1").system.dimension == 60
    assert registry.load("convdiff", {"c": 80}).parameters == {"c": 80.0, "grid": 50}
    assert registry.load("chemical").system.dimension == 5


def test_least_recently_used_entry_is_evicted():
    registry = ProblemRegistry(max_cache_size=2)
    a = registry.load("p3", {"size": 10})
    b = registry.load("p3", {"size": 11})
    registry.load("p3", {"size": 10})
    registry.load("p3", {"size": 12})
    assert registry.load("p3", {"size": 10}) is a
    assert registry.load("p3", {"size": 11}) is not b


def test_unknown_problem_and_bad_parameters():
    registry = ProblemRegistry()
    with pytest.raises(UnknownProblemError):
        registry.load("p9")
    with pytest.raises(ValueError):
        registry.load("p1", {"grid": 4})
    with pytest.raises(ValueError):
        registry.load("chemical", {"size": 5})
    with pytest.raises(ValueError):
        registry.load("p1", {"size": 7})


@pytest.mark.parametrize(
    "problem, params",
    [("p1", {"size": 60.7}), ("p3", {"size": 10.5}), ("convdiff", {"grid": 20.2}),
     ("p3", {"size": True})],
)
def test_fractional_sizes_are_rejected(problem, params):
    with pytest.raises(ValueError, match="whole number"):
        ProblemRegistry().load(problem, params)


def test_list_available_describes_every_problem():
    ids = [p["id"] for p in ProblemRegistry().list_available()]
    assert ids == ["chemical", "convdiff", "p1", "p2", "p3", "p4", "p5"]


def test_runner_dispatch():
    bench = ProblemRegistry().load("p2", {"size": 8})
    assert run_solver(bench, "inb").solver == "inb"
    assert run_solver(bench, "ardn").solver == "ardn"
    opts = build_options(bench, {"pinl_training_size": 3, "pinl_components": 1})
    assert run_solver(bench, "pinl", opts, inner="ardn").solver == "pinl+ardn"
    with pytest.raises(UnknownSolverError):
        run_solver(bench, "broyden")
    with pytest.raises(ValidationError):
        build_options(bench, {"g_max": 0})
