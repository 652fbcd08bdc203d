"""Pytest configuration and fixtures for backend tests."""

import pytest
from fastapi.testclient import TestClient

from backend.app import app
from backend.services.bounds_service import BoundsService
from backend.services.constructions_service import ConstructionsService
from backend.services.graph_core import LabeledGraph, PatternGraph, clique
from backend.services.invariants_service import InvariantsService
from backend.services.percolation_service import PercolationService
from backend.services.solver_service import SolverService
from backend.services.verify_service import VerifyService


@pytest.fixture
def client():
    """Create test client for FastAPI app."""
    with TestClient(app) as c:
        yield c


@pytest.fixture
def percolation():
    """Fresh percolation engine (non-induced copies)"""
    return PercolationService(induced=False)


@pytest.fixture
def invariants(percolation):
    return InvariantsService(percolation)


@pytest.fixture
def bounds(invariants):
    return BoundsService(invariants)


@pytest.fixture
def constructions(percolation, invariants):
    return ConstructionsService(percolation, invariants)


@pytest.fixture
def solver(percolation, invariants, bounds, constructions):
    return SolverService(percolation, invariants, bounds, constructions)


@pytest.fixture
def verifier(percolation, invariants, bounds, constructions, solver):
    return VerifyService(percolation, invariants, bounds, constructions, solver)


def make_pattern(spec: str) -> PatternGraph:
    return ConstructionsService().resolve_pattern(spec)[0]


@pytest.fixture
def k3():
    return PatternGraph.from_graph(clique(3), name="clique:3")


@pytest.fixture
def k4():
    return PatternGraph.from_graph(clique(4), name="clique:4")


@pytest.fixture
def c5():
    return PatternGraph.from_graph(
        LabeledGraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)]), name="cycle:5"
    )


@pytest.fixture
def fvd53():
    return make_pattern("fvd:5,3")


@pytest.fixture
def fabc342():
    return make_pattern("fabc:3,4,2")


@pytest.fixture
def k9mm():
    return make_pattern("k9mm")


@pytest.fixture
def named():
    """Resolver for named constructors and graph6 strings"""
    return make_pattern
