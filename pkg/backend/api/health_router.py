"""
Health Check Router
Liveness and readiness probes for the wsatlab API
"""

import sys
from datetime import datetime, timezone

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from backend.config import config
from backend.services.graph_core import LabeledGraph, PatternGraph, clique
from backend.services.percolation_service import get_percolation_service

UTC = timezone.utc

router = APIRouter(prefix="/health", tags=["health"])

# Track application start time
APP_START_TIME = datetime.now(UTC)


class HealthStatus(BaseModel):
    """Health check response model"""

    status: str
    timestamp: str
    version: str
    uptime_seconds: float
    checks: dict[str, bool]
    details: dict | None = None


def check_engine() -> bool:
    """K_3 minus an edge must percolate to K_3"""
    try:
        triangle = PatternGraph.from_graph(clique(3))
        path = LabeledGraph.from_edges(3, [(0, 1), (1, 2)])
        return get_percolation_service().is_weakly_saturated(triangle, path)
    except Exception:
        return False


@router.get("", response_model=HealthStatus)
async def basic_health_check():
    """Basic health check endpoint"""
    uptime = (datetime.now(UTC) - APP_START_TIME).total_seconds()
    return HealthStatus(
        status="healthy",
        timestamp=datetime.now(UTC).isoformat(),
        version=config.APP_VERSION,
        uptime_seconds=uptime,
        checks={"api": True},
        details={
            "python_version": f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}",
            "platform": sys.platform,
        },
    )


@router.get("/live")
async def liveness_check():
    """Liveness probe: the process is running"""
    return {"alive": True}


@router.get("/ready")
async def readiness_check():
    """Readiness probe: the percolation engine answers a known instance"""
    if not check_engine():
        raise HTTPException(status_code=503, detail="percolation engine not ready")
    return {"ready": True, "checks": {"engine": True}}
