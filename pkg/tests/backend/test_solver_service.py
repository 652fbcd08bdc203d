"""
Tests for Solver Service
Exact wsat(n, F) search, budgets, seeding orbits and formula ranges
"""

import pytest

from backend.config import config
from backend.services.errors import ParameterError
from backend.services.graph_core import LabeledGraph, PatternGraph, min_degree, parse_graph6
from backend.services.solver_service import LRUCache


@pytest.fixture
def c4():
    return PatternGraph.from_graph(
        LabeledGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]), name="cycle:4"
    )


@pytest.fixture
def two_edges():
    return PatternGraph.from_graph(LabeledGraph.from_edges(4, [(0, 1), (2, 3)]), name="2K2")


class TestExactValues:
    """Values the closed forms and the search agree on"""

    @pytest.mark.parametrize("spec, n, value", [("clique:3", 5, 4), ("clique:4", 6, 9), ("fvd:5,3", 5, 8)])
    def test_known_values(self, solver, named, spec, n, value):
        """Small cliques and F_(5,3) at the sandwich"""
        res = solver.wsat_exact(named(spec), n)
        assert res.exact
        assert res.value == value
        assert res.lower_bound == res.upper_bound == value
        assert res.witness is not None and res.witness.edge_count == value

    @pytest.mark.parametrize("n", range(3, 8))
    def test_triangle_formula(self, solver, named, n):
        """wsat(n, K_3) = n - 1"""
        res = solver.wsat_exact(named("clique:3"), n)
        assert res.exact
        assert res.value == n - 1

    @pytest.mark.parametrize("n", range(4, 7))
    def test_k4_formula(self, solver, named, n):
        """wsat(n, K_4) = 2n - 3"""
        res = solver.wsat_exact(named("clique:4"), n)
        assert res.exact
        assert res.value == 2 * n - 3

    def test_c4_needs_search(self, solver, percolation, c4):
        """Bipartite hosts never percolate under C_4, so five edges are needed"""
        res = solver.wsat_exact(c4, 5)
        assert res.exact
        assert res.value == 5
        assert res.nodes_expanded > 0
        assert res.witness.edge_count == 5
        assert percolation.is_weakly_saturated(c4, res.witness)

    def test_non_flat_pattern(self, solver, percolation, two_edges):
        """Two disjoint edges on four vertices need a star"""
        res = solver.wsat_exact(two_edges, 4)
        assert res.exact
        assert res.value == 3
        assert percolation.is_weakly_saturated(two_edges, res.witness)

    def test_witness_respects_degree_floor(self, solver, named):
        """Every witness vertex has degree at least delta - 1"""
        f = named("fvd:4,2")
        res = solver.wsat_exact(f, 6)
        assert res.exact
        assert min_degree(res.witness) >= f.delta - 1

    def test_canonical_is_value_neutral(self, solver, c4):
        """Isomorph rejection never changes the value"""
        assert solver.wsat_exact(c4, 5, canonical=True).value == 5

    def test_tiny_caches_are_value_neutral(self, solver, c4, monkeypatch):
        """Evicting feasibility and isomorph entries costs time, not correctness"""
        monkeypatch.setattr(config, "SOLVER_FEASIBILITY_CACHE_SIZE", 1)
        monkeypatch.setattr(config, "SOLVER_ISOMORPH_CACHE_SIZE", 1)
        res = solver.wsat_exact(c4, 5, canonical=True, workers=1)
        assert res.exact
        assert res.value == 5

    def test_all_minimum_witnesses(self, solver, percolation, k3):
        """Minimum K_3 saturators are the spanning trees: three shapes on five vertices"""
        res = solver.wsat_exact(k3, 5, all_witnesses=True)
        assert res.value == 4
        assert res.witnesses_complete
        assert len(res.witnesses) == 3
        assert sorted(max(g.degree(u) for u in range(5)) for g in res.witnesses) == [2, 3, 4]
        assert all(percolation.is_weakly_saturated(k3, g) for g in res.witnesses)
        data = res.to_json_dict()
        assert len(data["witnesses"]) == 3

    def test_witnesses_off_by_default(self, solver, k3):
        data = solver.wsat_exact(k3, 4).to_json_dict()
        assert data["witnesses"] is None
        assert data["witnesses_complete"] is None

    def test_n_below_v(self, solver, k4):
        with pytest.raises(ParameterError):
            solver.wsat_exact(k4, 3)

    def test_workers_must_be_positive(self, solver, c4):
        with pytest.raises(ParameterError):
            solver.wsat_exact(c4, 5, workers=0)


class TestBudget:
    """Exhausted budgets report the bracket"""

    def test_zero_node_budget(self, solver, c4):
        """No search at all: the generic witness and the starting lower bound"""
        res = solver.wsat_exact(c4, 5, budget_nodes=0)
        assert not res.exact
        assert res.value is None
        assert res.lower_bound == 4
        assert res.upper_bound == 6
        assert res.witness is not None and res.witness.edge_count == 6

    def test_tiny_node_budget(self, solver, two_edges):
        """A one-node budget refutes at most the first level"""
        res = solver.wsat_exact(two_edges, 4, budget_nodes=1)
        assert not res.exact
        assert 1 <= res.lower_bound < res.upper_bound == 5

    def test_json(self, solver, c4):
        """JSON carries graph6 witnesses and sorted prune counters"""
        data = solver.wsat_exact(c4, 5).to_json_dict()
        assert data["value"] == 5
        assert data["exact"] is True
        assert parse_graph6(data["witness"]).edge_count == data["witness_edges"] == 5
        assert list(data["pruned_by"]) == sorted(data["pruned_by"])


class TestSeeding:
    """Edge orbits and the starting lower bound"""

    def test_vertex_transitive_patterns(self, solver, k4, c4, two_edges):
        """Edge-transitive patterns need one seed"""
        assert solver.edge_orbits(k4) == [(0, 1)]
        assert solver.edge_orbits(c4) == [(0, 1)]
        assert solver.edge_orbits(two_edges) == [(0, 1)]

    def test_fabc_orbits(self, solver, fabc342):
        """Two cliques joined by a matching have six edge orbits"""
        assert solver.edge_orbits(fabc342) == [(0, 1), (0, 2), (0, 3), (3, 4), (3, 5), (5, 6)]

    def test_lower_bound(self, solver, c4, two_edges, k4):
        """Largest of the cheap lower bounds"""
        assert solver.lower_bound(c4, 5) == 4
        assert solver.lower_bound(two_edges, 4) == 1
        assert solver.lower_bound(k4, 6) == 9


class TestFormulaRange:
    """verify_formula_range statuses"""

    def test_matches(self, solver, named):
        """F_(4,2): wsat(n) = 3 + (n - 3)"""
        report = solver.verify_formula_range(named("fvd:4,2"), lambda n: n, range(4, 7))
        assert report.all_match
        assert report.count("match") == 3

    def test_mismatch(self, solver, named):
        """A wrong formula is reported, not raised"""
        report = solver.verify_formula_range(named("clique:3"), lambda n: n, range(3, 5))
        assert report.count("mismatch") == 2
        assert not report.all_match

    def test_timeout(self, solver, c4):
        """Budget exhaustion is a timeout"""
        report = solver.verify_formula_range(c4, lambda n: n, [5], budget_nodes=0)
        assert report.count("timeout") == 1
        data = report.to_json_dict()
        assert data["timeouts"] == 1
        assert data["checks"][0]["value"] is None


@pytest.mark.slow
class TestParallel:
    """Process-pool search"""

    def test_pool_outcomes(self, solver, percolation, c4):
        """Each seed runs in its own process and reports its own witness"""
        outcomes = solver._run_seeds(c4, 5, [(0, 1), (1, 2)], 2, 10_000, 60_000, 2, False)
        assert len(outcomes) == 2
        for outcome in outcomes:
            assert not outcome.exhausted
            assert outcome.witness is not None
            assert outcome.witness.edge_count == 5
            assert percolation.is_weakly_saturated(c4, outcome.witness)


class TestLRUCache:
    """Bounded isomorph buckets used inside the level search"""

    def test_evicts_least_recent(self):
        cache = LRUCache(2)
        cache.put(1, True)
        cache.put(2, False)
        assert cache.get(1) is True
        cache.put(3, True)
        assert len(cache) == 2
        assert cache.get(2) is None
        assert cache.get(1) is True
        assert cache.get(3) is True

    def test_empty_buckets_are_hits(self):
        """A stored empty bucket is distinguishable from a miss"""
        cache = LRUCache(4)
        cache.put("hash-a", [])
        assert cache.get("hash-a") == []
        assert cache.get("hash-b") is None
