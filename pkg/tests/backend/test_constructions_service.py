"""
Tests for Constructions Service
Pattern families, weakly saturated witnesses, pattern resolution and dispatch
"""

import pytest

from backend.config import config
from backend.services.constructions_service import (
    CATALOGUE,
    PATTERN_FAMILY,
    WEAKLY_SATURATED,
    s_sequences,
)
from backend.services.errors import GraphFormatError, HypothesisError, ParameterError
from backend.services.graph_core import LabeledGraph, PatternGraph, clique, min_degree


def path(n: int) -> LabeledGraph:
    return LabeledGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


class TestPatternFamilies:
    """Edge counts and minimum degrees of the named families"""

    @pytest.mark.parametrize(
        "params, v, ell",
        [((5, 3), 5, 9), ((4, 2), 4, 5), ((6, 1), 6, 11)],
    )
    def test_fvd(self, constructions, params, v, ell):
        """F_(v,delta): K_v with v-1-delta edges at vertex 0 removed"""
        res = constructions.pattern_F_v_delta(*params)
        assert res.graph.n == v
        assert res.claimed_edges == ell
        assert res.count_matches
        assert min_degree(res.graph) == params[1]
        assert res.claimed_property == PATTERN_FAMILY

    @pytest.mark.parametrize(
        "params, ell", [((3, 4, 2), 11), ((5, 5, 4), 24), ((2, 3, 1), 5)]
    )
    def test_fabc(self, constructions, params, ell):
        """F_(a,b,c): two cliques joined by a matching of size c"""
        res = constructions.pattern_F_abc(*params)
        assert res.graph.n == params[0] + params[1]
        assert res.claimed_edges == ell
        assert res.count_matches

    @pytest.mark.parametrize(
        "case, delta, m, ell",
        [(1, 2, 3, 10), (2, 2, 7, 30), (3, 3, 6, 32)],
    )
    def test_optimality_family(self, constructions, case, delta, m, ell):
        """All three cases have the stated size and minimum degree"""
        res = constructions.pattern_optimality_family(case, delta, m)
        assert res.claimed_edges == ell
        assert res.count_matches
        assert min_degree(res.graph) == delta
        assert res.distinguished

    def test_optimality_family_guards(self, constructions):
        """Out-of-range parameters are refused"""
        with pytest.raises(ParameterError):
            constructions.pattern_optimality_family(4, 2, 3)
        with pytest.raises(ParameterError):
            constructions.pattern_optimality_family(1, 2, 2)
        with pytest.raises(ParameterError):
            constructions.pattern_optimality_family(3, 4, 9)

    def test_nonconcentration(self, constructions):
        """delta=3, k=2, m=8: 37 edges, slope delta/2 + k/(delta+1)"""
        res = constructions.pattern_nonconcentration(3, 2, 8)
        assert res.claimed_edges == 37
        assert res.count_matches
        assert res.extras["s"] == [0, 0, 1, 2]
        assert res.extras["slope"] == {"num": 2, "den": 1}
        assert min_degree(res.graph) == 3

    def test_nonconcentration_guards(self, constructions):
        """k and m have admissible ranges"""
        with pytest.raises(ParameterError):
            constructions.pattern_nonconcentration(3, 3, 8)
        with pytest.raises(ParameterError):
            constructions.pattern_nonconcentration(3, 2, 5)
        with pytest.raises(ParameterError):
            constructions.pattern_nonconcentration(1, 0, 5)

    def test_k9_minus_matching(self, constructions):
        """32 edges, minimum degree 7, the matched single ends as P"""
        res = constructions.pattern_k9_minus_matching()
        assert res.count_matches
        assert res.graph.edge_count == 32
        assert min_degree(res.graph) == 7
        assert res.distinguished == frozenset({0, 2, 4, 6})

    def test_fvd_is_flat(self, constructions):
        """verify() on a family checks wsat(v,F) = ell - 1"""
        assert constructions.verify(constructions.pattern_F_v_delta(5, 3)) is True

    def test_as_pattern_refuses_saturators(self, constructions):
        """Saturators are not patterns"""
        with pytest.raises(HypothesisError):
            constructions.saturator_clique_witness(4, 6).as_pattern()


class TestSSequences:
    """Degree-split sequences for the non-concentration family"""

    def test_unique_cases(self):
        """Small cases have a single admissible sequence"""
        assert s_sequences(3, 2) == [(0, 0, 1, 2)]
        assert s_sequences(2, 0) == [(0, 0, 1)]

    def test_ties_are_ordered(self):
        """delta=4, k=2 admits two sequences; the larger prefix sums come first"""
        assert s_sequences(4, 2) == [(0, 0, 1, 1, 1), (0, 0, 0, 1, 2)]

    def test_shape(self):
        """Every sequence starts 0, 0, rises by at most one and sums to k + 1"""
        for delta in range(2, 6):
            for k in range((delta - 2) * (delta + 1) // 2 + 1):
                for s in s_sequences(delta, k):
                    assert s[:2] == (0, 0)
                    assert all(b - a in (0, 1) for a, b in zip(s, s[1:]))
                    assert sum(s) == k + 1


class TestSparseGrowth:
    """Sparse growth and the anchored gadget"""

    def test_k4_single_vertex(self, constructions, k4):
        """K_4 with P={3}: two edges per new vertex"""
        res = constructions.saturator_sparse_growth(k4, {3}, 3)
        assert res.graph.n == 7
        assert res.claimed_edges == 11
        assert res.count_matches
        assert res.extras["anchor_edges"] == 0
        assert constructions.verify(res) is True

    def test_k3_pendant_growth(self, constructions, k3):
        """K_3 with P={2} grows a tree"""
        res = constructions.saturator_sparse_growth(k3, {2}, 4)
        assert res.graph.edge_count == 6
        assert res.count_matches
        assert constructions.verify(res) is True

    def test_zero_steps(self, constructions, k4):
        """No steps leaves F minus its flat witness edge"""
        res = constructions.saturator_sparse_growth(k4, {3}, 0)
        assert res.graph.n == 4
        assert res.graph.edge_count == 5

    @pytest.mark.slow
    def test_k9_gadget(self, constructions, k9mm):
        """Four vertices and 22 edges per step, still weakly saturated"""
        res = constructions.saturator_sparse_growth(k9mm, {0, 2, 4, 6}, 2)
        assert res.extras["per_step_edges"] == 22
        assert res.extras["anchor_edges"] == 1
        assert res.graph.n == 17
        assert res.claimed_edges == 31 + 44
        assert res.count_matches
        assert constructions.verify(res) is True

    def test_bad_p(self, constructions, k4):
        """P must be a non-empty proper subset"""
        with pytest.raises(HypothesisError):
            constructions.saturator_sparse_growth(k4, set(), 1)
        with pytest.raises(HypothesisError):
            constructions.saturator_sparse_growth(k4, {0, 1, 2, 3}, 1)

    def test_non_flat_pattern(self, constructions):
        """Growth needs a flat pattern"""
        two_edges = PatternGraph.from_graph(LabeledGraph.from_edges(4, [(0, 1), (2, 3)]))
        with pytest.raises(HypothesisError):
            constructions.saturator_sparse_growth(two_edges, {3}, 1)


class TestWitnesses:
    """g*_beta witness, clique witness and the generic saturator"""

    @pytest.mark.parametrize("n, edges", [(6, 9), (7, 11), (8, 13)])
    def test_gstar_witness_k4(self, constructions, k4, n, edges):
        """K_4 witnesses meet the 2n - 3 count"""
        res = constructions.saturator_gstar_witness(k4, n)
        assert res.graph.n == n
        assert res.claimed_edges == edges
        assert res.count_matches
        assert constructions.verify(res) is True

    def test_gstar_witness_k3(self, constructions, k3):
        """K_3 witness is a tree"""
        res = constructions.saturator_gstar_witness(k3, 6)
        assert res.claimed_edges == 5
        assert res.count_matches
        assert constructions.verify(res) is True

    def test_gstar_witness_corpus(self, constructions, c5, fabc342):
        """Witnesses saturate for other flat patterns"""
        for f in (c5, fabc342):
            res = constructions.saturator_gstar_witness(f, f.v + 3)
            assert res.count_matches
            assert constructions.verify(res) is True

    @pytest.mark.parametrize("v, n, edges", [(4, 6, 9), (3, 5, 4), (5, 7, 15)])
    def test_clique_witness(self, constructions, v, n, edges):
        """K_(v-2) joined to an independent set"""
        res = constructions.saturator_clique_witness(v, n)
        assert res.claimed_edges == edges
        assert res.count_matches
        assert res.claimed_property == WEAKLY_SATURATED
        assert constructions.verify(res) is True

    def test_generic(self, constructions, k4, fvd53):
        """Generic witnesses match upper_bound_generic"""
        for f, n, edges in ((k4, 6, 9), (fvd53, 7, 12)):
            res = constructions.saturator_generic(f, n)
            assert res.claimed_edges == edges
            assert res.count_matches
            assert res.extras["flat_base"]
            assert constructions.verify(res) is True

    def test_generic_n_below_v(self, constructions, k4):
        with pytest.raises(ParameterError):
            constructions.saturator_generic(k4, 3)

    def test_verify_skips_large_graphs(self, constructions, monkeypatch):
        """Graphs above the verification cap are left unverified"""
        monkeypatch.setattr(config, "CLOSURE_VERIFY_MAX_VERTICES", 5)
        assert constructions.verify(constructions.saturator_clique_witness(4, 6)) is None


class TestUnionGlue:
    """Subadditivity gluing"""

    def test_fixed_sets(self, constructions, k3):
        """Two paths glued by (v-2)^2 cross edges stay saturated"""
        res = constructions.saturator_union_glue(path(3), path(4), k3, "fixed-sets")
        assert res.graph.n == 7
        assert res.claimed_edges == 6
        assert res.count_matches
        assert constructions.verify(res) is True

    def test_first_copy(self, constructions, k3):
        """Identifying the first activated copy saves its inside edges"""
        res = constructions.saturator_union_glue(path(3), path(4), k3, "first-copy")
        assert res.graph.n == 4
        assert res.extras["saving"] == 2
        assert res.claimed_edges == 3
        assert res.count_matches
        assert constructions.verify(res) is True

    def test_first_copy_generic_k4(self, constructions, k4):
        """Gluing two generic K_4 saturators"""
        h = constructions.saturator_generic(k4, 5).graph
        res = constructions.saturator_union_glue(h, h, k4, "first-copy")
        assert res.count_matches
        assert constructions.verify(res) is True

    def test_rejects_unsaturated_input(self, constructions, k3):
        """Both inputs must percolate"""
        matching = LabeledGraph.from_edges(4, [(0, 1), (2, 3)])
        with pytest.raises(HypothesisError):
            constructions.saturator_union_glue(matching, path(3), k3)

    def test_unknown_variant(self, constructions, k3):
        with pytest.raises(ParameterError):
            constructions.saturator_union_glue(path(3), path(3), k3, "sideways")

    def test_first_copy_needs_a_step(self, constructions, k3):
        """A complete second part has nothing to glue along"""
        with pytest.raises(HypothesisError):
            constructions.saturator_union_glue(path(3), clique(3), k3, "first-copy")


class TestResolveAndBuild:
    """Named pattern lookup and catalogue dispatch"""

    def test_resolve_named(self, constructions):
        """Named constructors carry their distinguished sets"""
        f, p = constructions.resolve_pattern("clique:4")
        assert (f.v, f.ell) == (4, 6)
        assert f.label() == "clique:4"
        assert p is None
        f, p = constructions.resolve_pattern("k9mm")
        assert f.ell == 32
        assert p == frozenset({0, 2, 4, 6})

    def test_resolve_graph6(self, constructions):
        """Anything else is read as graph6"""
        f, p = constructions.resolve_pattern("C~")
        assert f.graph == clique(4)
        assert p is None

    def test_resolve_errors(self, constructions):
        """Bad arity, bad integers and bad graph6 are reported"""
        with pytest.raises(ParameterError):
            constructions.resolve_pattern("fvd:5")
        with pytest.raises(ParameterError):
            constructions.resolve_pattern("clique:x")
        with pytest.raises(GraphFormatError):
            constructions.resolve_pattern("not graph6!")

    def test_catalogue(self, constructions):
        """Every catalogue entry is listed"""
        assert constructions.catalogue() == CATALOGUE
        assert "union-glue" in CATALOGUE

    def test_build_families_and_witnesses(self, constructions):
        """build dispatches on the catalogue name"""
        assert constructions.build("fabc", [3, 4, 2]).claimed_edges == 11
        assert constructions.build("k9mm").graph.edge_count == 32
        assert constructions.build("clique-witness", [4, 6]).claimed_edges == 9
        assert constructions.build("generic", pattern="clique:4", n=6).claimed_edges == 9
        assert constructions.build("gstar-witness", pattern="clique:4", n=7).claimed_edges == 11
        growth = constructions.build("sparse-growth", pattern="clique:4", p=[3], steps=2)
        assert growth.claimed_edges == 9

    def test_build_glue(self, constructions):
        """Hosts travel as graph6"""
        res = constructions.build("union-glue", pattern="clique:3", host_a="Bg", host_b="Bg")
        assert res.graph.n == 6
        assert res.count_matches

    def test_build_errors(self, constructions):
        """Missing inputs are parameter errors"""
        with pytest.raises(ParameterError):
            constructions.build("nonsense")
        with pytest.raises(ParameterError):
            constructions.build("fvd", [5])
        with pytest.raises(ParameterError):
            constructions.build("generic", n=6)
        with pytest.raises(ParameterError):
            constructions.build("generic", pattern="clique:4")
        with pytest.raises(ParameterError):
            constructions.build("sparse-growth", pattern="clique:4")
        with pytest.raises(ParameterError):
            constructions.build("union-glue", pattern="clique:3", host_a="Bg")

    def test_json(self, constructions):
        """JSON carries graph6 and the claim record"""
        data = constructions.saturator_clique_witness(4, 6).to_json_dict()
        assert data["edges"] == data["claimed_edges"] == 9
        assert data["claimed_property"] == WEAKLY_SATURATED
        assert data["pattern"]["v"] == 4
