"""
Solver Service
Exact wsat(n, F) at desk scale: iterative deepening on the edge count, one
depth-first search per level over the edge slots left after seeding F minus an
edge, pruned by capacity, the degree floor and optimistic-closure feasibility.
"""

from __future__ import annotations

import functools
import math
import time
from collections import Counter, OrderedDict
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import networkx as nx
from networkx.algorithms import isomorphism

from backend.config import config
from backend.services.bounds_service import BoundsService, get_bounds_service
from backend.services.constructions_service import (
    ConstructionsService,
    get_constructions_service,
)
from backend.services.errors import InapplicableBoundError, ParameterError
from backend.services.graph_core import (
    Edge,
    LabeledGraph,
    PatternGraph,
    clique,
    normalize_edge,
    to_graph6,
)
from backend.services.invariants_service import InvariantsService, get_invariants_service
from backend.services.logger import get_logger, log_timing
from backend.services.percolation_service import PercolationService, get_percolation_service

logger = get_logger("solver")


@dataclass
class SolveResult:
    """Outcome of an exact search; non-exact results carry the bracketing bounds"""

    pattern: str
    n: int
    value: int | None
    witness: LabeledGraph | None
    exact: bool
    lower_bound: int
    upper_bound: int
    nodes_expanded: int = 0
    pruned_by: dict[str, int] = field(default_factory=dict)
    time_ms: int = 0
    seeds: int = 0
    # One witness per isomorphism class, filled only on request
    witnesses: list[LabeledGraph] | None = None
    witnesses_complete: bool = False

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "pattern": self.pattern,
            "n": self.n,
            "value": self.value,
            "exact": self.exact,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "witness": to_graph6(self.witness) if self.witness is not None else None,
            "witness_edges": self.witness.edge_count if self.witness is not None else None,
            "nodes_expanded": self.nodes_expanded,
            "pruned_by": dict(sorted(self.pruned_by.items())),
            "time_ms": self.time_ms,
            "seeds": self.seeds,
            "witnesses": [to_graph6(g) for g in self.witnesses] if self.witnesses is not None else None,
            "witnesses_complete": self.witnesses_complete if self.witnesses is not None else None,
        }


@dataclass
class FormulaCheck:
    n: int
    expected: int
    value: int | None
    status: str  # match, mismatch or timeout

    def to_json_dict(self) -> dict[str, Any]:
        return {"n": self.n, "expected": self.expected, "value": self.value, "status": self.status}


@dataclass
class FormulaRangeReport:
    pattern: str
    checks: list[FormulaCheck]

    @property
    def all_match(self) -> bool:
        return all(c.status == "match" for c in self.checks)

    def count(self, status: str) -> int:
        return sum(c.status == status for c in self.checks)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "pattern": self.pattern,
            "matches": self.count("match"),
            "mismatches": self.count("mismatch"),
            "timeouts": self.count("timeout"),
            "checks": [c.to_json_dict() for c in self.checks],
        }


class _BudgetExhausted(Exception):
    pass


@dataclass
class _LevelOutcome:
    witness: LabeledGraph | None
    nodes: int
    pruned: Counter
    exhausted: bool
    found: list[LabeledGraph] = field(default_factory=list)


class LRUCache:
    """Mapping that drops the least recently used key past `size` entries"""

    def __init__(self, size: int):
        self.size = max(size, 1)
        self.data: OrderedDict = OrderedDict()

    def get(self, key: Any) -> Any:
        value = self.data.get(key)
        if value is not None:
            self.data.move_to_end(key)
        return value

    def put(self, key: Any, value: Any) -> None:
        self.data[key] = value
        self.data.move_to_end(key)
        if len(self.data) > self.size:
            self.data.popitem(last=False)

    def __len__(self) -> int:
        return len(self.data)


class _LevelSearch:
    """Is there a weakly saturated graph with F - seed on [v], seed absent, and k more edges?"""

    def __init__(
        self,
        f: PatternGraph,
        n: int,
        seed: Edge,
        k: int,
        budget_nodes: int,
        deadline: float,
        canonical: bool,
        percolation: PercolationService,
        collect: bool = False,
    ):
        self.f = f
        self.n = n
        self.k = k
        self.budget_nodes = budget_nodes
        self.deadline = deadline
        self.canonical = canonical
        self.percolation = percolation
        self.collect = collect

        rows = [0] * n
        for a, b in f.graph.edges():
            if (a, b) != seed:
                rows[a] |= 1 << b
                rows[b] |= 1 << a
        self.rows = rows
        self.seed = seed
        self.slots = [
            (a, b)
            for a in range(n)
            for b in range(a + 1, n)
            if not rows[a] >> b & 1 and (a, b) != seed
        ]
        self.deg = [r.bit_count() for r in rows]
        self.rem = [0] * n
        for a, b in self.slots:
            self.rem[a] += 1
            self.rem[b] += 1
        self.floor = min(f.delta - 1, n - 1)

        self.nodes = 0
        self.pruned: Counter = Counter()
        bounded = functools.lru_cache(maxsize=config.SOLVER_FEASIBILITY_CACHE_SIZE)
        self._feasible = bounded(self._optimistic_closure_complete)
        self.rejected = LRUCache(config.SOLVER_ISOMORPH_CACHE_SIZE)
        self.witness: LabeledGraph | None = None
        self.found: list[LabeledGraph] = []

    def run(self) -> _LevelOutcome:
        exhausted = False
        try:
            if self.k >= 0 and self._feasible(0):
                self._dfs(0, 0, 0)
        except _BudgetExhausted:
            exhausted = True
        return _LevelOutcome(self.witness, self.nodes, self.pruned, exhausted, self.found)

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget_nodes:
            raise _BudgetExhausted
        if self.nodes & 0xFF == 0 and time.monotonic() > self.deadline:
            raise _BudgetExhausted

    def _degree_ok(self, chosen: int) -> bool:
        total = 0
        for x in range(self.n):
            need = self.floor - self.deg[x]
            if need > 0:
                if need > self.rem[x]:
                    return False
                total += need
        return total <= 2 * (self.k - chosen)

    def _optimistic_closure_complete(self, excluded: int) -> bool:
        """Closure of the graph with every undecided slot present must be complete"""
        full = (1 << self.n) - 1
        rows = [full & ~(1 << x) for x in range(self.n)]
        u, w = self.seed
        rows[u] &= ~(1 << w)
        rows[w] &= ~(1 << u)
        i = 0
        bits = excluded
        while bits:
            if bits & 1:
                a, b = self.slots[i]
                rows[a] &= ~(1 << b)
                rows[b] &= ~(1 << a)
            bits >>= 1
            i += 1
        return self.percolation.closure(self.f, LabeledGraph(self.n, tuple(rows))).is_complete()

    def _dfs(self, i: int, chosen: int, excluded: int) -> bool:
        self._tick()
        if not self._degree_ok(chosen):
            self.pruned["degree-floor"] += 1
            return False
        if chosen == self.k:
            return self._leaf()
        if len(self.slots) - i < self.k - chosen:
            self.pruned["capacity"] += 1
            return False

        a, b = self.slots[i]
        rows, deg, rem = self.rows, self.deg, self.rem
        rem[a] -= 1
        rem[b] -= 1
        try:
            rows[a] |= 1 << b
            rows[b] |= 1 << a
            deg[a] += 1
            deg[b] += 1
            found = self._dfs(i + 1, chosen + 1, excluded)
            rows[a] &= ~(1 << b)
            rows[b] &= ~(1 << a)
            deg[a] -= 1
            deg[b] -= 1
            if found:
                return True

            excluded |= 1 << i
            if not self._feasible(excluded):
                self.pruned["feasibility"] += 1
                return False
            return self._dfs(i + 1, chosen, excluded)
        finally:
            rem[a] += 1
            rem[b] += 1

    def _leaf(self) -> bool:
        g = LabeledGraph(self.n, tuple(self.rows))
        if self.canonical:
            nxg = g.to_networkx()
            key = nx.weisfeiler_lehman_graph_hash(nxg)
            bucket = self.rejected.get(key)
            if bucket is None:
                bucket = []
                self.rejected.put(key, bucket)
            elif any(nx.is_isomorphic(nxg, other) for other in bucket):
                self.pruned["isomorph"] += 1
                return False
            bucket.append(nxg)
        if self.percolation.is_weakly_saturated(self.f, g):
            if self.collect:
                self.found.append(g)
                return False
            self.witness = g
            return True
        return False


def _run_level(
    f: PatternGraph, n: int, seed: Edge, k: int, budget_nodes: int, budget_ms: int, canonical: bool
) -> _LevelOutcome:
    """Process-pool entry point"""
    deadline = time.monotonic() + budget_ms / 1000
    search = _LevelSearch(
        f, n, seed, k, budget_nodes, deadline, canonical, get_percolation_service()
    )
    return search.run()


class SolverService:
    """Exact weak saturation numbers by pruned exhaustive search"""

    def __init__(
        self,
        percolation: PercolationService | None = None,
        invariants: InvariantsService | None = None,
        bounds: BoundsService | None = None,
        constructions: ConstructionsService | None = None,
    ):
        self.percolation = percolation or get_percolation_service()
        self.invariants = invariants or get_invariants_service()
        self.bounds = bounds or BoundsService(self.invariants)
        self.constructions = constructions or ConstructionsService(self.percolation, self.invariants)

    def edge_orbits(self, f: PatternGraph) -> list[Edge]:
        """Lexicographically first edge of each orbit under the automorphisms found"""
        edges = f.graph.edges()
        index = {e: i for i, e in enumerate(edges)}
        parent = list(range(len(edges)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def merge(perm: dict[int, int]) -> None:
            for i, (a, b) in enumerate(edges):
                j = index[normalize_edge(perm[a], perm[b])]
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

        adj = f.graph.adj
        identity = {u: u for u in range(f.v)}
        for u in range(f.v):
            for w in range(u + 1, f.v):
                if adj[u] & ~(1 << w) == adj[w] & ~(1 << u):
                    merge({**identity, u: w, w: u})

        g = f.graph.to_networkx()
        matcher = isomorphism.GraphMatcher(g, g)
        for count, mapping in enumerate(matcher.isomorphisms_iter()):
            if count >= config.AUTOMORPHISM_ENUMERATION_CAP:
                logger.debug(f"automorphism enumeration capped for {f.label()}")
                break
            merge(mapping)
        return [edges[i] for i in sorted({find(i) for i in range(len(edges))})]

    def lower_bound(self, f: PatternGraph, n: int) -> int:
        profile = self.invariants.profile(f, i_max=n - f.v, with_flatness=False)
        candidates = [f.ell - 1, self.bounds.lower_bound_gstar(profile, n)]
        try:
            candidates.append(self.bounds.lower_bound_theorem1(f, n))
        except InapplicableBoundError:
            pass
        candidates.append(math.ceil(n * min(f.delta - 1, n - 1) / 2))
        return max(candidates)

    def wsat_exact(
        self,
        f: PatternGraph,
        n: int,
        budget_nodes: int | None = None,
        budget_ms: int | None = None,
        workers: int | None = None,
        canonical: bool | None = None,
        all_witnesses: bool = False,
    ) -> SolveResult:
        if n < f.v:
            raise ParameterError(f"n={n} must be at least v={f.v}")
        budget_nodes = config.SOLVER_BUDGET_NODES if budget_nodes is None else budget_nodes
        budget_ms = config.SOLVER_BUDGET_MS if budget_ms is None else budget_ms
        workers = config.SOLVER_WORKERS if workers is None else workers
        canonical = config.SOLVER_CANONICAL_AUGMENTATION if canonical is None else canonical
        if workers < 1:
            raise ParameterError("workers must be at least 1")

        started = time.monotonic()
        lower = self.lower_bound(f, n)
        generic = self.constructions.saturator_generic(f, n).graph
        if not self.percolation.is_weakly_saturated(f, generic):
            logger.error(f"generic saturator failed for {f.label()} at n={n}, using K_n")
            generic = clique(n)
        upper = generic.edge_count
        seeds = self.edge_orbits(f)
        result = SolveResult(f.label(), n, None, None, False, lower, upper, seeds=len(seeds))
        pruned: Counter = Counter()

        def finish(value: int | None, witness: LabeledGraph | None, exact: bool) -> SolveResult:
            result.value, result.witness, result.exact = value, witness, exact
            result.pruned_by = dict(pruned)
            if exact and all_witnesses:
                assert value is not None
                spent_ms = int((time.monotonic() - started) * 1000)
                result.witnesses, result.witnesses_complete = self.minimum_witnesses(
                    f, n, value, budget_nodes - result.nodes_expanded, budget_ms - spent_ms
                )
            result.time_ms = int((time.monotonic() - started) * 1000)
            logger.info(
                f"wsat({n}, {f.label()}): value={value} exact={exact} "
                f"bounds=[{result.lower_bound}, {result.upper_bound}] nodes={result.nodes_expanded}"
            )
            return result

        for m in range(lower, upper):
            k = m - (f.ell - 1)
            remaining_nodes = budget_nodes - result.nodes_expanded
            remaining_ms = budget_ms - int((time.monotonic() - started) * 1000)
            if remaining_nodes <= 0 or remaining_ms <= 0:
                result.lower_bound = m
                return finish(None, generic, False)
            with log_timing(logger, f"level m={m}", pattern=f.label(), n=n, m=m) as level:
                outcomes = self._run_seeds(
                    f, n, seeds, k, remaining_nodes, remaining_ms, workers, canonical
                )
                level["nodes"] = sum(o.nodes for o in outcomes)
            witness = None
            exhausted = False
            for outcome in outcomes:
                result.nodes_expanded += outcome.nodes
                pruned.update(outcome.pruned)
                exhausted = exhausted or outcome.exhausted
                if witness is None and outcome.witness is not None:
                    witness = outcome.witness
            if witness is not None:
                result.upper_bound = m
                result.lower_bound = m
                return finish(m, witness, True)
            if exhausted:
                result.lower_bound = m
                return finish(None, generic, False)
            logger.debug(f"no {m}-edge weakly saturated graph for {f.label()} on {n} vertices")
        result.lower_bound = upper
        return finish(upper, generic, True)

    def _run_seeds(
        self,
        f: PatternGraph,
        n: int,
        seeds: list[Edge],
        k: int,
        budget_nodes: int,
        budget_ms: int,
        workers: int,
        canonical: bool,
    ) -> list[_LevelOutcome]:
        if workers == 1 or len(seeds) == 1:
            outcomes = []
            deadline = time.monotonic() + budget_ms / 1000
            for seed in seeds:
                spent = sum(o.nodes for o in outcomes)
                search = _LevelSearch(
                    f, n, seed, k, budget_nodes - spent, deadline, canonical, self.percolation
                )
                outcome = search.run()
                outcomes.append(outcome)
                if outcome.witness is not None or outcome.exhausted:
                    break
            return outcomes
        share = max(1, budget_nodes // len(seeds))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_level, f, n, seed, k, share, budget_ms, canonical) for seed in seeds
            ]
            return [fut.result() for fut in futures]

    def minimum_witnesses(
        self, f: PatternGraph, n: int, m: int, budget_nodes: int, budget_ms: int
    ) -> tuple[list[LabeledGraph], bool]:
        """Every m-edge weakly saturated graph on n vertices up to relabeling.

        The flag is False when the budget ran out before every seed was searched.
        """
        k = m - (f.ell - 1)
        deadline = time.monotonic() + max(budget_ms, 0) / 1000
        classes: dict[str, list[tuple[nx.Graph, LabeledGraph]]] = {}
        spent = 0
        complete = True
        for seed in self.edge_orbits(f):
            search = _LevelSearch(
                f, n, seed, k, budget_nodes - spent, deadline, False, self.percolation, collect=True
            )
            outcome = search.run()
            spent += outcome.nodes
            for g in outcome.found:
                nxg = g.to_networkx()
                bucket = classes.setdefault(nx.weisfeiler_lehman_graph_hash(nxg), [])
                if not any(nx.is_isomorphic(nxg, other) for other, _ in bucket):
                    bucket.append((nxg, g))
            if outcome.exhausted:
                complete = False
                break
        found = sorted((g for bucket in classes.values() for _, g in bucket), key=to_graph6)
        logger.info(f"{len(found)} minimum witnesses for {f.label()} on {n} vertices, complete={complete}")
        return found, complete

    def verify_formula_range(
        self,
        f: PatternGraph,
        formula: Callable[[int], int],
        n_range: Iterable[int],
        budget_nodes: int | None = None,
        budget_ms: int | None = None,
        workers: int | None = None,
    ) -> FormulaRangeReport:
        checks = []
        for n in n_range:
            expected = formula(n)
            res = self.wsat_exact(f, n, budget_nodes, budget_ms, workers)
            if not res.exact:
                status = "timeout"
            else:
                status = "match" if res.value == expected else "mismatch"
            checks.append(FormulaCheck(n, expected, res.value, status))
        report = FormulaRangeReport(f.label(), checks)
        logger.info(
            f"formula range for {f.label()}: {report.count('match')} match, "
            f"{report.count('mismatch')} mismatch, {report.count('timeout')} timeout"
        )
        return report


# Singleton instance
_solver_service: SolverService | None = None


def get_solver_service() -> SolverService:
    """Get or create the solver service singleton"""
    global _solver_service
    if _solver_service is None:
        _solver_service = SolverService(bounds=get_bounds_service(), constructions=get_constructions_service())
    return _solver_service
