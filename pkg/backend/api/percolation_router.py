"""
Percolation API Router
Closure traces and weak saturation checks
"""

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from backend.services.constructions_service import get_constructions_service
from backend.services.graph_core import parse_graph6
from backend.services.logger import get_logger
from backend.services.percolation_service import get_percolation_service

logger = get_logger("api.percolation")

router = APIRouter(prefix="/percolation", tags=["percolation"])


class HostRequest(BaseModel):
    pattern: str
    graph: str = Field(..., description="host graph in graph6")


@router.post("/closure")
def closure_trace(request: HostRequest):
    """Closure of the host with one witness embedding per added edge"""
    try:
        f, _ = get_constructions_service().resolve_pattern(request.pattern)
        host = parse_graph6(request.graph)
        return get_percolation_service().trace(f, host).to_json_dict()
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error computing closure: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Failed to compute closure")


@router.post("/check")
def check_saturation(request: HostRequest):
    """Weak saturation verdict with the trace as certificate"""
    try:
        f, _ = get_constructions_service().resolve_pattern(request.pattern)
        host = parse_graph6(request.graph)
        trace = get_percolation_service().trace(f, host)
        return {
            "pattern": f.label(),
            "n": host.n,
            "weakly_saturated": trace.final.is_complete(),
            "certificate": trace.to_json_dict(),
        }
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error checking saturation: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail="Failed to check saturation")
