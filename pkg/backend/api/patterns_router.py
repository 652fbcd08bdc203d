"""
Patterns API Router
Invariant profiles and bound reports for a pattern F
"""

from fractions import Fraction

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from backend.services.bounds_service import get_bounds_service
from backend.services.constructions_service import get_constructions_service
from backend.services.invariants_service import get_invariants_service
from backend.services.logger import get_logger

logger = get_logger("api.patterns")

router = APIRouter(prefix="/patterns", tags=["patterns"])


class InvariantsRequest(BaseModel):
    pattern: str = Field(..., description="graph6 or a named constructor such as clique:4")
    i_max: int | None = Field(None, ge=0)


class BoundsRequest(BaseModel):
    pattern: str
    n_min: int | None = Field(None, ge=1)
    n_max: int | None = Field(None, ge=1)
    r: int | None = Field(None, ge=0)
    cf: str | None = Field(None, description="certified c_F as a rational, e.g. 3/2")


@router.post("/invariants")
def pattern_invariants(request: InvariantsRequest):
    """BoundProfile of a pattern"""
    try:
        f, _ = get_constructions_service().resolve_pattern(request.pattern)
        return get_invariants_service().profile(f, i_max=request.i_max).to_json_dict()
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error computing invariants: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Failed to compute invariants")


@router.post("/bounds")
def pattern_bounds(request: BoundsRequest):
    """BoundReports over an n-range"""
    try:
        f, distinguished = get_constructions_service().resolve_pattern(request.pattern)
        lo = request.n_min if request.n_min is not None else f.v
        hi = request.n_max if request.n_max is not None else lo + 3
        if hi < lo:
            raise HTTPException(status_code=400, detail="n_max is below n_min")
        cf = Fraction(request.cf) if request.cf is not None else None
        profile = get_invariants_service().profile(f, i_max=hi - f.v)
        bounds = get_bounds_service()
        payload = {
            "pattern": f.label(),
            "reports": [
                bounds.report(profile, n, cf=cf, distinguished=distinguished).to_json_dict()
                for n in range(lo, hi + 1)
            ],
        }
        if request.r is not None:
            payload["bridges_status"] = bounds.bridges_status(profile, request.r).to_json_dict()
        return payload
    except HTTPException:
        raise
    except (ValueError, ZeroDivisionError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error computing bounds: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Failed to compute bounds")
