from fastapi import APIRouter, HTTPException
from pydantic import ValidationError

from app.models.schemas import SolveReport, SolveRequest
from app.services.errors import SolverError
from app.services.registry import UnknownProblemError, registry
from app.services.runner import UnknownSolverError, build_options, run_solver

router = APIRouter(prefix="/api/solve", tags=["solve"])


@router.post("", response_model=SolveReport)
def solve(req: SolveRequest):
    """Run one solver on one benchmark and return the full report."""
    try:
        bench = registry.load(req.problem, req.params)
    except UnknownProblemError as e:
        raise HTTPException(status_code=404, detail=str(e.args[0]))
    except (ValueError, TypeError) as e:
        raise HTTPException(status_code=400, detail=str(e))

    try:
        options = build_options(bench, req.options)
    except ValidationError as e:
        raise HTTPException(status_code=400, detail=str(e))

    try:
        return run_solver(bench, req.solver, options, req.inner)
    except UnknownSolverError as e:
        raise HTTPException(status_code=404, detail=str(e.args[0]))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except SolverError as e:
        raise HTTPException(status_code=422, detail=f"{type(e).__name__}: {e}")
