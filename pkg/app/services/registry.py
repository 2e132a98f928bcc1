import threading
from collections import OrderedDict
from typing import Any, Callable

from app.services.problems import (
    BenchmarkProblem,
    augmented_rosenbrock,
    chemical_equilibrium,
    convection_diffusion,
    five_diagonal,
    modified_rosenbrock,
    tridiagonal,
    tridimensional_valley,
)

# id -> (builder, default parameters, description)
PROBLEMS: dict[str, tuple[Callable[..., BenchmarkProblem], dict[str, Any], str]] = {
    "chemical": (
        chemical_equilibrium, {}, "Chemical equilibrium, n = 5, finite-difference Jacobian"
    ),
    "convdiff": (
        convection_diffusion,
        {"c": 100.0, "grid": 50},
        "2-D convection-diffusion, central differences on a grid x grid interior",
    ),
    "p1": (modified_rosenbrock, {"size": 60}, "Modified Rosenbrock, even n"),
    "p2": (augmented_rosenbrock, {"size": 6000}, "Augmented Rosenbrock, n divisible by 4"),
    "p3": (tridiagonal, {"size": 60}, "Tridiagonal system, n >= 3"),
    "p4": (five_diagonal, {"size": 100}, "Five-diagonal system, n >= 5"),
    "p5": (tridimensional_valley, {"size": 1200}, "Tridimensional valley, n divisible by 3"),
}


class UnknownProblemError(KeyError):
    pass


def _whole_number(problem_id: str, name: str, value: Any) -> int:
    if isinstance(value, bool) or not float(value).is_integer():
        raise ValueError(f"{problem_id}: {name} must be a whole number, got {value!r}")
    return int(value)


def _builder_kwargs(problem_id: str, params: dict[str, Any]) -> dict[str, Any]:
    """Translate user-facing parameter names into builder arguments."""
    if problem_id == "chemical":
        if params:
            raise ValueError("chemical takes no parameters")
        return {}
    if problem_id == "convdiff":
        unknown = set(params) - {"c", "grid"}
        if unknown:
            raise ValueError(f"convdiff does not accept {sorted(unknown)}")
        return {
            "c": float(params["c"]),
            "grid_n": _whole_number(problem_id, "grid", params["grid"]),
        }
    unknown = set(params) - {"size"}
    if unknown:
        raise ValueError(f"{problem_id} does not accept {sorted(unknown)}")
    return {"n": _whole_number(problem_id, "size", params["size"])}


class ProblemRegistry:
    """Builds and caches benchmark systems with an LRU policy."""

    def __init__(self, max_cache_size: int = 16):
        self._cache: OrderedDict[tuple, BenchmarkProblem] = OrderedDict()
        self._max_cache_size = max_cache_size
        self._lock = threading.Lock()

    @staticmethod
    def resolve_params(problem_id: str, params: dict[str, Any] | None = None) -> dict[str, Any]:
        """Defaults for ``problem_id`` overlaid with ``params``."""
        if problem_id not in PROBLEMS:
            raise UnknownProblemError(
                f"unknown problem {problem_id!r}; expected one of {', '.join(PROBLEMS)}"
            )
        return {**PROBLEMS[problem_id][1], **(params or {})}

    def load(self, problem_id: str, params: dict[str, Any] | None = None) -> BenchmarkProblem:
        resolved = self.resolve_params(problem_id, params)
        key = (problem_id, tuple(sorted(resolved.items())))
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]

        builder = PROBLEMS[problem_id][0]
        bench = builder(**_builder_kwargs(problem_id, resolved))
        # sweep workers share the singleton
        with self._lock:
            self._cache[key] = bench
            if len(self._cache) > self._max_cache_size:
                self._cache.popitem(last=False)
        return bench

    def list_available(self) -> list[dict]:
        return [
            {
                "id": problem_id,
                "name": builder.__name__.replace("_", " "),
                "parameters": dict(defaults),
                "description": description,
            }
            for problem_id, (builder, defaults, description) in PROBLEMS.items()
        ]


# Global singleton
registry = ProblemRegistry()
