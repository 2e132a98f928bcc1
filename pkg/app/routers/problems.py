from fastapi import APIRouter

from app.models.schemas import ProblemInfo, ProblemListResponse
from app.services.registry import registry

router = APIRouter(prefix="/api/problems", tags=["problems"])


@router.get("", response_model=ProblemListResponse)
async def list_problems():
    """List every benchmark id with its default parameters."""
    return ProblemListResponse(problems=[ProblemInfo(**p) for p in registry.list_available()])
