from fastapi import APIRouter

from app.models.schemas import SweepRequest, SweepResponse
from app.services.sweep import run_sweep

router = APIRouter(prefix="/api/sweep", tags=["sweep"])


@router.post("", response_model=SweepResponse)
def sweep(req: SweepRequest):
    """Run every row; per-row failures come back in the row's ``error`` field."""
    results = run_sweep(req.rows, jobs=req.jobs)
    return SweepResponse(results=results, errors=sum(1 for r in results if r.error))
