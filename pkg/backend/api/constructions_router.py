"""
Constructions API Router
Catalogue and builder for pattern families and saturators
"""

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from backend.services.constructions_service import get_constructions_service
from backend.services.logger import get_logger

logger = get_logger("api.constructions")

router = APIRouter(prefix="/constructions", tags=["constructions"])


class ConstructionRequest(BaseModel):
    params: list[int] | None = None
    pattern: str | None = None
    n: int | None = None
    p: list[int] | None = None
    steps: int | None = None
    host_a: str | None = None
    host_b: str | None = None
    variant: str = "fixed-sets"
    verify: bool = False


@router.get("")
async def list_constructions():
    """Construction names with their parameter records"""
    return {"constructions": get_constructions_service().catalogue()}


@router.post("/{name}")
def build_construction(name: str, request: ConstructionRequest):
    """Build a construction; optionally closure-verify its claimed property"""
    service = get_constructions_service()
    try:
        result = service.build(
            name,
            params=request.params,
            pattern=request.pattern,
            n=request.n,
            p=request.p,
            steps=request.steps,
            host_a=request.host_a,
            host_b=request.host_b,
            variant=request.variant,
        )
        payload = result.to_json_dict()
        payload["verified"] = service.verify(result) if request.verify else None
        return payload
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error building {name}: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Failed to build construction")
