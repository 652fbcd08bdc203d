"""
Constructions Service
Pattern families (F_{v,delta}, F_{a,b,c}, the optimality and non-concentration
families, K_9 minus a perfect matching) and weakly saturated witnesses (sparse
growth, g*_beta witness, clique witness H_{v,n}, generic saturator,
union glue). Arbitrary choices are fixed lexicographically on vertex labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from backend.config import config
from backend.services.errors import HypothesisError, ParameterError
from backend.services.graph_core import (
    Edge,
    LabeledGraph,
    PatternGraph,
    clique,
    disjoint_union,
    induced_subgraph,
    iter_bits,
    normalize_edge,
    parse_graph6,
    to_graph6,
)
from backend.services.invariants_service import (
    InvariantsService,
    get_invariants_service,
    rational_json,
)
from backend.services.logger import get_logger
from backend.services.percolation_service import PercolationService, get_percolation_service

logger = get_logger("constructions")

WEAKLY_SATURATED = "weakly-saturated"
PATTERN_FAMILY = "pattern-family"


@dataclass
class ConstructionResult:
    """A constructed graph with its claimed edge count"""

    name: str
    graph: LabeledGraph
    pattern: PatternGraph | None
    claimed_edges: int
    claimed_property: str
    parameters: dict[str, Any]
    distinguished: frozenset[int] | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def count_matches(self) -> bool:
        return self.graph.edge_count == self.claimed_edges

    def as_pattern(self) -> PatternGraph:
        if self.claimed_property != PATTERN_FAMILY:
            raise HypothesisError(f"{self.name} is a saturator, not a pattern")
        return PatternGraph.from_graph(self.graph, name=self.label())

    def label(self) -> str:
        args = ",".join(str(v) for v in self.parameters.values() if not isinstance(v, dict))
        return f"{self.name}:{args}" if args else self.name

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "graph6": to_graph6(self.graph),
            "n": self.graph.n,
            "edges": self.graph.edge_count,
            "claimed_edges": self.claimed_edges,
            "claimed_property": self.claimed_property,
            "parameters": self.parameters,
            "pattern": self.pattern.to_json_dict() if self.pattern else None,
            "distinguished": sorted(self.distinguished) if self.distinguished else None,
            "extras": self.extras,
        }


def _graph(n: int, edges: list[Edge]) -> LabeledGraph:
    return LabeledGraph.from_edges(n, edges)


def _clique_edges(vertices: list[int]) -> list[Edge]:
    return [(a, b) for i, a in enumerate(vertices) for b in vertices[i + 1 :]]


def s_sequences(delta: int, k: int) -> list[tuple[int, ...]]:
    """All s with s_1 = s_2 = 0, steps in {0, 1}, sum k + 1, in decreasing lex order"""
    found = []

    def extend(seq: list[int]) -> None:
        if len(seq) == delta + 1:
            if sum(seq) == k + 1:
                found.append(tuple(seq))
            return
        for step in (1, 0):
            extend(seq + [seq[-1] + step])

    extend([0, 0])
    return found


class ConstructionsService:
    """Builds and verifies the explicit constructions"""

    def __init__(
        self,
        percolation: PercolationService | None = None,
        invariants: InvariantsService | None = None,
    ):
        self.percolation = percolation or get_percolation_service()
        self.invariants = invariants or get_invariants_service()

    # Pattern families

    def pattern_clique(self, v: int) -> ConstructionResult:
        if v < 2:
            raise ParameterError(f"clique needs v >= 2, got {v}")
        return ConstructionResult(
            "clique", clique(v), None, math.comb(v, 2), PATTERN_FAMILY, {"v": v}
        )

    def pattern_F_v_delta(self, v: int, delta: int) -> ConstructionResult:
        if v < 3 or not 1 <= delta <= v - 2:
            raise ParameterError(f"F_(v,delta) needs v >= 3 and 1 <= delta <= v-2, got ({v},{delta})")
        missing = {(0, v - 1 - j) for j in range(v - 1 - delta)}
        edges = [e for e in _clique_edges(list(range(v))) if e not in missing]
        return ConstructionResult(
            "fvd",
            _graph(v, edges),
            None,
            math.comb(v, 2) - (v - 1 - delta),
            PATTERN_FAMILY,
            {"v": v, "delta": delta},
            extras={
                "wsat_formula": f"wsat(n) = {math.comb(v - 1, 2)} + (n - {v - 1}) * {delta - 1}",
            },
        )

    def pattern_F_abc(self, a: int, b: int, c: int) -> ConstructionResult:
        if not 1 <= c <= a <= b:
            raise ParameterError(f"F_(a,b,c) needs 1 <= c <= a <= b, got ({a},{b},{c})")
        edges = _clique_edges(list(range(a))) + _clique_edges(list(range(a, a + b)))
        edges += [(i, a + i) for i in range(c)]
        return ConstructionResult(
            "fabc",
            _graph(a + b, edges),
            None,
            math.comb(a, 2) + math.comb(b, 2) + c,
            PATTERN_FAMILY,
            {"a": a, "b": b, "c": c},
        )

    def pattern_optimality_family(self, case: int, delta: int, m: int) -> ConstructionResult:
        if case == 1:
            return self._optimality_case1(delta, m)
        if case == 2:
            return self._optimality_case2(delta, m)
        if case == 3:
            return self._optimality_case3(delta, m)
        raise ParameterError(f"optimality family case must be 1, 2 or 3, got {case}")

    def _family_result(
        self, case: int, delta: int, m: int, n: int, edges: list[Edge], ell: int,
        p: list[int], slope: Fraction,
    ) -> ConstructionResult:
        return ConstructionResult(
            "optfam",
            _graph(n, edges),
            None,
            ell,
            PATTERN_FAMILY,
            {"case": case, "delta": delta, "m": m},
            distinguished=frozenset(p),
            extras={"slope": rational_json(slope)},
        )

    def _optimality_case1(self, delta: int, m: int) -> ConstructionResult:
        if m < 3 or delta < 2:
            raise ParameterError(f"case 1 needs m >= 3 and delta >= 2, got m={m}, delta={delta}")
        size = delta + 1
        blocks = [list(range(j * size, (j + 1) * size)) for j in range(m)]
        edges = [e for block in blocks for e in _clique_edges(block)]
        edges.append((blocks[0][0], blocks[1][0]))
        ell = m * delta * (delta + 1) // 2 + 1
        slope = Fraction(delta, 2) - Fraction(1, delta + 1)
        return self._family_result(1, delta, m, m * size, edges, ell, blocks[-1], slope)

    def _optimality_case2(self, delta: int, m: int) -> ConstructionResult:
        if delta < 2 or m < delta + 5:
            raise ParameterError(f"case 2 needs delta >= 2 and m >= delta+5, got m={m}, delta={delta}")
        a1 = list(range(0, delta + 1))
        a2 = list(range(delta + 1, 2 * delta + 2))
        b = list(range(2 * delta + 2, 2 * delta + 2 + m))
        edges = _clique_edges(a1) + _clique_edges(a2) + _clique_edges(b)
        edges.remove((a1[0], a1[1]))
        edges += [(a1[0], b[0]), (a1[1], b[1]), (a2[0], b[2]), (a2[1], b[3])]
        ell = m * (m - 1) // 2 + delta * (delta + 1) + 3
        return self._family_result(2, delta, m, 2 * delta + 2 + m, edges, ell, a1, Fraction(delta, 2))

    def _optimality_case3(self, delta: int, m: int) -> ConstructionResult:
        if delta < 3 or delta % 2 == 0 or m < delta + 3:
            raise ParameterError(
                f"case 3 needs odd delta >= 3 and m >= delta+3, got m={m}, delta={delta}"
            )
        a1 = list(range(0, delta + 1))
        a2 = list(range(delta + 1, 2 * delta + 2))
        b = list(range(2 * delta + 2, 2 * delta + 2 + m))
        x1, x2 = 2 * delta + 2 + m, 2 * delta + 3 + m
        edges = _clique_edges(a1) + _clique_edges(a2) + _clique_edges(b)
        for block in (a1, a2):
            for i in range(0, delta + 1, 2):
                edges.remove((block[i], block[i + 1]))
        edges += [(a1[0], b[0]), (a2[0], b[1])]
        edges += [(u, x1) for u in a1[1:]] + [(u, x2) for u in a2]
        ell = m * (m - 1) // 2 + (delta + 1) ** 2 + 1
        slope = Fraction(delta, 2) - Fraction(1, 2 * (delta + 2))
        return self._family_result(3, delta, m, x2 + 1, edges, ell, a1 + [x1], slope)

    def pattern_nonconcentration(self, delta: int, k: int, m: int) -> ConstructionResult:
        if delta < 2:
            raise ParameterError(f"non-concentration family needs delta >= 2, got {delta}")
        k_max = (delta - 2) * (delta + 1) // 2
        if not 0 <= k <= k_max:
            raise ParameterError(f"k must lie in 0..{k_max} for delta={delta}, got {k}")
        if m < max(2 * (k + 1), 2 * delta + 1):
            raise ParameterError(f"m must be at least {max(2 * (k + 1), 2 * delta + 1)}, got {m}")
        candidates = s_sequences(delta, k)
        assert candidates, f"no s-sequence for delta={delta}, k={k}"
        # Largest prefix sums: the lexicographically largest sequence
        s = candidates[0]
        a = list(range(delta + 1))
        b = list(range(delta + 1, delta + 1 + m))
        edges = _clique_edges(a) + _clique_edges(b)
        cursor = 0
        for i, size in enumerate(s):
            edges += [(a[i], w) for w in b[cursor : cursor + size]]
            cursor += size
        ell = math.comb(m, 2) + math.comb(delta + 1, 2) + k + 1
        rho = Fraction(delta, 2) + Fraction(k, delta + 1)
        return ConstructionResult(
            "noncon",
            _graph(delta + 1 + m, edges),
            None,
            ell,
            PATTERN_FAMILY,
            {"delta": delta, "k": k, "m": m},
            distinguished=frozenset(a),
            extras={"s": list(s), "slope": rational_json(rho), "s_candidates": len(candidates)},
        )

    def pattern_k9_minus_matching(self) -> ConstructionResult:
        matching = {(0, 1), (2, 3), (4, 5), (6, 7)}
        edges = [e for e in _clique_edges(list(range(9))) if e not in matching]
        return ConstructionResult(
            "k9mm",
            _graph(9, edges),
            None,
            32,
            PATTERN_FAMILY,
            {},
            distinguished=frozenset({0, 2, 4, 6}),
            extras={"matching": [list(e) for e in sorted(matching)]},
        )

    # Saturators

    def _require_flat(self, f: PatternGraph) -> Edge:
        flat, witness = self.invariants.flatness(f)
        if not flat or witness is None:
            raise HypothesisError(f"{f.label()} is not flat: wsat(v,F) > ell - 1")
        return witness

    def saturator_sparse_growth(
        self, f: PatternGraph, p: frozenset[int] | set[int], steps: int
    ) -> ConstructionResult:
        p = frozenset(p)
        if not p or not p <= set(range(f.v)) or len(p) == f.v:
            raise HypothesisError("P must be a non-empty proper subset of V(F)")
        if steps < 0:
            raise ParameterError("steps must be non-negative")
        flat_edge = self._require_flat(f)
        inside = sorted(p)
        outside = [u for u in range(f.v) if u not in p]
        anchors = max(0, f.delta - 1 - len(outside))

        f_edges = f.graph.edges()
        inner = [e for e in f_edges if e[0] in p and e[1] in p]
        cross = [e for e in f_edges if (e[0] in p) != (e[1] in p)]
        dropped = (inner or cross)[0] if anchors else cross[0]

        rows = list(f.graph.adj)
        u0, w0 = flat_edge
        rows[u0] &= ~(1 << w0)
        rows[w0] &= ~(1 << u0)
        edges = [e for e in f_edges if e != flat_edge]
        size = f.v
        glue = {o: i for i, o in enumerate(outside)}  # K = first v - |P| vertices
        for _ in range(steps):
            fresh = {q: size + i for i, q in enumerate(inside)}
            for a, b in inner + cross:
                if (a, b) == dropped:
                    continue
                x = fresh[a] if a in p else glue[a]
                y = fresh[b] if b in p else glue[b]
                edges.append(normalize_edge(x, y))
            for j in range(anchors):
                edges.append((len(outside) + j, fresh[inside[0]]))
            size += len(p)

        per_step = f.ell - induced_subgraph(f.graph, outside).edge_count - 1 + anchors
        result = ConstructionResult(
            "sparse-growth",
            _graph(size, edges),
            f,
            per_step * steps + f.ell - 1,
            WEAKLY_SATURATED,
            {"P": inside, "steps": steps},
            distinguished=p,
            extras={
                "per_step_vertices": len(p),
                "per_step_edges": per_step,
                "slope": rational_json(Fraction(per_step, len(p))),
                "anchor_edges": anchors,
            },
        )
        logger.info(f"sparse growth for {f.label()}: {steps} steps of +{len(p)}v/+{per_step}e")
        return result

    def saturator_gstar_witness(self, f: PatternGraph, n: int) -> ConstructionResult:
        if n < f.v:
            raise ParameterError(f"n={n} must be at least v={f.v}")
        flat_edge = self._require_flat(f)
        ed = self.invariants.edge_deficiency(f)
        beta = self.invariants.beta(f)
        parts = self.invariants.gstar_composition(ed, beta, n - f.v)

        edges = [e for e in f.graph.edges() if e != flat_edge]
        size = f.v
        f_edges = f.graph.edges()
        for i in parts:
            s_mask = ed.argmin_sets[i]
            s_vertices = list(iter_bits(s_mask))
            rest = [u for u in range(f.v) if not s_mask >> u & 1]
            image = {u: size + j for j, u in enumerate(s_vertices)}
            image.update({u: j for j, u in enumerate(rest)})  # W = first v - i vertices
            touching = [e for e in f_edges if s_mask >> e[0] & 1 or s_mask >> e[1] & 1]
            edges += [normalize_edge(image[a], image[b]) for a, b in touching[1:]]
            size += i

        total = sum(ed.e[i] for i in parts) + f.ell - 1
        return ConstructionResult(
            "gstar-witness",
            _graph(n, edges),
            f,
            total,
            WEAKLY_SATURATED,
            {"n": n},
            extras={"beta": beta, "composition": parts},
        )

    def saturator_clique_witness(self, v: int, n: int) -> ConstructionResult:
        if not n >= v >= 3:
            raise ParameterError(f"H_(v,n) needs n >= v >= 3, got v={v}, n={n}")
        core = list(range(v - 2))
        edges = _clique_edges(core) + [(c, x) for x in range(v - 2, n) for c in core]
        return ConstructionResult(
            "clique-witness",
            _graph(n, edges),
            PatternGraph.from_graph(clique(v), name=f"clique:{v}"),
            math.comb(v, 2) - 1 + (n - v) * (v - 2),
            WEAKLY_SATURATED,
            {"v": v, "n": n},
        )

    def saturator_generic(self, f: PatternGraph, n: int) -> ConstructionResult:
        """Generic witness: a percolating v-vertex base plus delta-1 edges per extra vertex"""
        if n < f.v:
            raise ParameterError(f"n={n} must be at least v={f.v}")
        flat, witness = self.invariants.flatness(f)
        if flat and witness is not None:
            base = [e for e in f.graph.edges() if e != witness]
            base_count = f.ell - 1
        else:
            base = [e for e in _clique_edges(list(range(f.v))) if e != (0, 1)]
            base_count = math.comb(f.v, 2) - 1
        edges = base + [(c, x) for x in range(f.v, n) for c in range(f.delta - 1)]
        return ConstructionResult(
            "generic",
            _graph(n, edges),
            f,
            base_count + (n - f.v) * (f.delta - 1),
            WEAKLY_SATURATED,
            {"n": n},
            extras={"flat_base": flat},
        )

    def saturator_union_glue(
        self, h_a: LabeledGraph, h_b: LabeledGraph, f: PatternGraph, variant: str = "fixed-sets"
    ) -> ConstructionResult:
        for h in (h_a, h_b):
            if not self.percolation.is_weakly_saturated(f, h):
                raise HypothesisError(f"glue input {h!r} is not weakly saturated for {f.label()}")
        if variant == "fixed-sets":
            return self._glue_fixed_sets(h_a, h_b, f)
        if variant == "first-copy":
            return self._glue_first_copy(h_a, h_b, f)
        raise ParameterError(f"unknown glue variant {variant!r}")

    def _glue_fixed_sets(self, h_a: LabeledGraph, h_b: LabeledGraph, f: PatternGraph) -> ConstructionResult:
        side = f.v - 2
        if h_a.n < side or h_b.n < side:
            raise HypothesisError(f"both parts need at least v-2={side} vertices")
        union = disjoint_union(h_a, h_b)
        cross = [(x, h_a.n + y) for x in range(side) for y in range(side)]
        edges = union.edges() + cross
        return ConstructionResult(
            "union-glue",
            _graph(union.n, edges),
            f,
            h_a.edge_count + h_b.edge_count + side * side,
            WEAKLY_SATURATED,
            {"variant": "fixed-sets", "m": h_a.n, "n": union.n},
        )

    def _glue_first_copy(self, h_a: LabeledGraph, h_b: LabeledGraph, f: PatternGraph) -> ConstructionResult:
        if h_a.n < f.v or h_b.n < f.v:
            raise HypothesisError(f"both parts need at least v={f.v} vertices")
        first = self.percolation.trace(f, h_b)
        if h_b.is_complete() or not first.steps:
            raise HypothesisError("second part has no activation step to glue along")
        copy = sorted(set(first.steps[0].embedding))
        phi = {y: i for i, y in enumerate(copy)}  # label-order bijection onto U = [v]
        rest = [x for x in range(h_b.n) if x not in phi]
        relabel = {x: h_a.n + i for i, x in enumerate(rest)}
        edges = h_a.edges()
        for x, y in h_b.edges():
            if x in relabel and y in relabel:
                edges.append((relabel[x], relabel[y]))
            elif x in relabel:
                edges.append(normalize_edge(relabel[x], phi[y]))
            elif y in relabel:
                edges.append(normalize_edge(phi[x], relabel[y]))
        inside = induced_subgraph(h_b, copy).edge_count
        n = h_a.n + len(rest)
        return ConstructionResult(
            "union-glue",
            _graph(n, edges),
            f,
            h_a.edge_count + h_b.edge_count - inside,
            WEAKLY_SATURATED,
            {"variant": "first-copy", "m": h_a.n, "n": n},
            extras={"saving": inside},
        )

    # Verification and lookup

    def verify(self, result: ConstructionResult) -> bool | None:
        """Closure check of the claimed property; None when too large to check"""
        if result.graph.n > config.CLOSURE_VERIFY_MAX_VERTICES:
            logger.warning(f"{result.label()} left unverified: {result.graph.n} vertices")
            return None
        if result.claimed_property == WEAKLY_SATURATED:
            assert result.pattern is not None
            return self.percolation.is_weakly_saturated(result.pattern, result.graph)
        return self.invariants.flatness(result.as_pattern())[0]

    def resolve_pattern(self, spec: str) -> tuple[PatternGraph, frozenset[int] | None]:
        """Named constructor (clique:v, fvd:v,d, fabc:a,b,c, optfam:c,d,m, noncon:d,k,m, k9mm) or graph6"""
        spec = spec.strip()
        name, _, args = spec.partition(":")
        builders = {
            "clique": (self.pattern_clique, 1),
            "fvd": (self.pattern_F_v_delta, 2),
            "fabc": (self.pattern_F_abc, 3),
            "optfam": (self.pattern_optimality_family, 3),
            "noncon": (self.pattern_nonconcentration, 3),
            "k9mm": (lambda: self.pattern_k9_minus_matching(), 0),
        }
        if name in builders:
            builder, arity = builders[name]
            try:
                values = [int(x) for x in args.split(",")] if args else []
            except ValueError as e:
                raise ParameterError(f"non-integer parameter in pattern {spec!r}") from e
            if len(values) != arity:
                raise ParameterError(f"pattern {name} takes {arity} parameters, got {len(values)}")
            result = builder(*values)
            return PatternGraph.from_graph(result.graph, name=spec), result.distinguished
        return PatternGraph.from_graph(parse_graph6(spec)), None

    def catalogue(self) -> dict[str, str]:
        return dict(CATALOGUE)

    def build(
        self,
        name: str,
        params: list[int] | None = None,
        pattern: str | None = None,
        n: int | None = None,
        p: list[int] | None = None,
        steps: int | None = None,
        host_a: str | None = None,
        host_b: str | None = None,
        variant: str = "fixed-sets",
    ) -> ConstructionResult:
        """Dispatch a catalogue name with its parameter record"""
        if name not in CATALOGUE:
            raise ParameterError(f"unknown construction {name!r}; choose from {', '.join(CATALOGUE)}")
        params = params or []
        families = {
            "clique": self.pattern_clique,
            "fvd": self.pattern_F_v_delta,
            "fabc": self.pattern_F_abc,
            "optfam": self.pattern_optimality_family,
            "noncon": self.pattern_nonconcentration,
        }
        if name in families:
            try:
                return families[name](*params)
            except TypeError as e:
                raise ParameterError(f"{name} expects parameters {CATALOGUE[name]}") from e
        if name == "k9mm":
            return self.pattern_k9_minus_matching()
        if name == "clique-witness":
            if len(params) != 2:
                raise ParameterError("clique-witness expects parameters v,n")
            return self.saturator_clique_witness(*params)

        if pattern is None:
            raise ParameterError(f"{name} needs a pattern")
        f, distinguished = self.resolve_pattern(pattern)
        if name == "sparse-growth":
            chosen = frozenset(p) if p else distinguished
            if not chosen:
                raise ParameterError("sparse-growth needs P (no distinguished set for this pattern)")
            return self.saturator_sparse_growth(f, chosen, 1 if steps is None else steps)
        if name == "union-glue":
            if host_a is None or host_b is None:
                raise ParameterError("union-glue needs two graph6 hosts")
            return self.saturator_union_glue(parse_graph6(host_a), parse_graph6(host_b), f, variant)
        if n is None:
            raise ParameterError(f"{name} needs n")
        if name == "gstar-witness":
            return self.saturator_gstar_witness(f, n)
        return self.saturator_generic(f, n)


CATALOGUE = {
    "clique": "v",
    "fvd": "v,delta",
    "fabc": "a,b,c",
    "optfam": "case,delta,m",
    "noncon": "delta,k,m",
    "k9mm": "",
    "clique-witness": "v,n",
    "sparse-growth": "pattern, P, steps",
    "gstar-witness": "pattern, n",
    "generic": "pattern, n",
    "union-glue": "pattern, host_a, host_b, variant",
}


# Singleton instance
_constructions_service: ConstructionsService | None = None


def get_constructions_service() -> ConstructionsService:
    """Get or create the constructions service singleton"""
    global _constructions_service
    if _constructions_service is None:
        _constructions_service = ConstructionsService()
    return _constructions_service
