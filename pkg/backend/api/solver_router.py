"""
Solver API Router
Exact wsat(n, F) at desk scale
"""

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from backend.services.constructions_service import get_constructions_service
from backend.services.logger import get_logger
from backend.services.solver_service import get_solver_service

logger = get_logger("api.solver")

router = APIRouter(prefix="/solver", tags=["solver"])


class SolveRequest(BaseModel):
    pattern: str
    n: int = Field(..., ge=1)
    budget_nodes: int | None = Field(None, ge=1)
    budget_ms: int | None = Field(None, ge=1)
    workers: int | None = Field(None, ge=1)
    canonical: bool | None = None
    all_witnesses: bool = False


@router.post("/solve")
def solve(request: SolveRequest):
    """SolveResult; budget exhaustion returns a non-exact result, not an error"""
    try:
        f, _ = get_constructions_service().resolve_pattern(request.pattern)
        result = get_solver_service().wsat_exact(
            f,
            request.n,
            budget_nodes=request.budget_nodes,
            budget_ms=request.budget_ms,
            workers=request.workers,
            canonical=request.canonical,
            all_witnesses=request.all_witnesses,
        )
        return result.to_json_dict()
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error solving: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Solver failed")
