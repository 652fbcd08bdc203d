"""Tests for backend API endpoints."""

from fastapi.testclient import TestClient


def test_root_endpoint(client: TestClient):
    """Test root endpoint returns expected data."""
    response = client.get("/")
    assert response.status_code == 200
    data = response.json()
    assert data["name"] == "wsatlab"
    assert data["status"] == "running"
    assert "version" in data


def test_health_endpoint(client: TestClient):
    """Test health check endpoint."""
    response = client.get("/health")
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "healthy"
    assert data["checks"] == {"api": True}


def test_probes(client: TestClient):
    """Liveness and readiness probes."""
    assert client.get("/health/live").json() == {"alive": True}
    response = client.get("/health/ready")
    assert response.status_code == 200
    assert response.json()["checks"]["engine"] is True


def test_cors_headers(client: TestClient):
    """Test CORS headers are properly set."""
    response = client.options(
        "/health",
        headers={"Origin": "http://localhost:5173", "Access-Control-Request-Method": "GET"},
    )
    assert response.status_code == 200
    assert "access-control-allow-origin" in response.headers


def test_invalid_endpoint(client: TestClient):
    """Test that invalid endpoints return 404."""
    response = client.get("/invalid/endpoint")
    assert response.status_code == 404


class TestPatternEndpoints:
    """Tests for /patterns."""

    def test_invariants(self, client: TestClient):
        """K_4 profile."""
        response = client.post("/patterns/invariants", json={"pattern": "clique:4"})
        assert response.status_code == 200
        data = response.json()
        assert data["e"] == [0, 2, 4, 5, 5]
        assert data["gamma"] == {"num": 5, "den": 3}
        assert data["kset"] == [1, 3, 4]

    def test_invariants_bad_pattern(self, client: TestClient):
        """Malformed graph6 is a client error."""
        response = client.post("/patterns/invariants", json={"pattern": "not graph6!"})
        assert response.status_code == 400

    def test_bounds(self, client: TestClient):
        """Reports over a range with the g*_r status."""
        response = client.post(
            "/patterns/bounds", json={"pattern": "clique:4", "n_min": 6, "n_max": 7, "r": 2}
        )
        assert response.status_code == 200
        data = response.json()
        assert [rep["n"] for rep in data["reports"]] == [6, 7]
        assert data["reports"][1]["exact"] == {"val": 11, "src": "cor2"}
        assert data["bridges_status"]["grants_upper_bound"] is True

    def test_bounds_bad_range(self, client: TestClient):
        response = client.post("/patterns/bounds", json={"pattern": "clique:4", "n_min": 8, "n_max": 6})
        assert response.status_code == 400

    def test_bounds_bad_cf(self, client: TestClient):
        response = client.post("/patterns/bounds", json={"pattern": "clique:4", "cf": "1/0"})
        assert response.status_code == 400

    def test_bounds_r_out_of_range(self, client: TestClient):
        """r outside 0..v-1."""
        response = client.post("/patterns/bounds", json={"pattern": "clique:3", "r": 5})
        assert response.status_code == 400


class TestPercolationEndpoints:
    """Tests for /percolation."""

    def test_closure(self, client: TestClient):
        """A path closes to K_4 under triangles."""
        response = client.post("/percolation/closure", json={"pattern": "clique:3", "graph": "Ch"})
        assert response.status_code == 200
        data = response.json()
        assert data["complete"] is True
        assert [step["edge"] for step in data["steps"]] == [[0, 2], [0, 3], [1, 3]]

    def test_check(self, client: TestClient):
        """The empty graph is not weakly saturated."""
        response = client.post("/percolation/check", json={"pattern": "clique:3", "graph": "C?"})
        assert response.status_code == 200
        assert response.json()["weakly_saturated"] is False

    def test_bad_host(self, client: TestClient):
        response = client.post("/percolation/check", json={"pattern": "clique:3", "graph": "C"})
        assert response.status_code == 400


class TestConstructionEndpoints:
    """Tests for /constructions."""

    def test_catalogue(self, client: TestClient):
        response = client.get("/constructions")
        assert response.status_code == 200
        assert "k9mm" in response.json()["constructions"]

    def test_build(self, client: TestClient):
        """H_(4,6) with verification."""
        response = client.post("/constructions/clique-witness", json={"params": [4, 6], "verify": True})
        assert response.status_code == 200
        data = response.json()
        assert data["edges"] == data["claimed_edges"] == 9
        assert data["verified"] is True

    def test_build_unknown(self, client: TestClient):
        response = client.post("/constructions/nonsense", json={})
        assert response.status_code == 400

    def test_build_hypothesis_failure(self, client: TestClient):
        """Non-saturated glue inputs are refused."""
        response = client.post(
            "/constructions/union-glue",
            json={"pattern": "clique:3", "host_a": "C?", "host_b": "Bg"},
        )
        assert response.status_code == 400


class TestSolverEndpoints:
    """Tests for /solver."""

    def test_solve(self, client: TestClient):
        response = client.post("/solver/solve", json={"pattern": "clique:4", "n": 6})
        assert response.status_code == 200
        data = response.json()
        assert data["value"] == 9
        assert data["exact"] is True

    def test_solve_n_below_v(self, client: TestClient):
        response = client.post("/solver/solve", json={"pattern": "clique:4", "n": 3})
        assert response.status_code == 400

    def test_solve_validation(self, client: TestClient):
        """Pydantic rejects non-positive budgets."""
        response = client.post("/solver/solve", json={"pattern": "clique:4", "n": 6, "workers": 0})
        assert response.status_code == 422
