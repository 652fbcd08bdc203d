"""
wsatlab HTTP application
Exposes invariants, bounds, percolation, constructions and the exact solver.
"""

from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from backend.api.constructions_router import router as constructions_router
from backend.api.health_router import router as health_router
from backend.api.patterns_router import router as patterns_router
from backend.api.percolation_router import router as percolation_router
from backend.api.solver_router import router as solver_router
from backend.config import config
from backend.services.constructions_service import get_constructions_service
from backend.services.logger import get_logger
from backend.services.solver_service import get_solver_service

logger = get_logger("app")


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Manage application lifecycle"""
    logger.info(f"Starting {config.APP_NAME} {config.APP_VERSION}")
    # Warm the service singletons
    get_constructions_service()
    get_solver_service()
    yield
    logger.info("Shutting down")


app = FastAPI(
    title=config.APP_NAME,
    description=config.APP_DESCRIPTION,
    version=config.APP_VERSION,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=config.ALLOWED_ORIGINS,
    allow_credentials=False,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["Content-Type"],
    max_age=config.CORS_MAX_AGE,
)

app.include_router(health_router)
app.include_router(patterns_router)
app.include_router(percolation_router)
app.include_router(constructions_router)
app.include_router(solver_router)


@app.get("/")
async def root():
    """Root endpoint"""
    return {"name": config.APP_NAME, "status": "running", "version": config.APP_VERSION}


if __name__ == "__main__":
    uvicorn.run("backend.app:app", host=config.HOST, port=config.PORT, reload=config.RELOAD)
