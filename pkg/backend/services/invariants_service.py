"""
Invariants Service
Edge-deficiency vector e_i, gamma, the g*_r tables, the indecomposable sets K and
K_r, the bridge parameter beta, flatness, and the BoundProfile bundling them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any

from backend.config import config
from backend.services.errors import CapacityError, ParameterError
from backend.services.graph_core import (
    Edge,
    PatternGraph,
    clique,
    has_cut_edge,
    induced_subgraph,
    remove_edge,
)
from backend.services.logger import get_logger
from backend.services.percolation_service import PercolationService, get_percolation_service

logger = get_logger("invariants")

INF = float("inf")


def rational_json(q: Fraction) -> dict[str, int]:
    return {"num": q.numerator, "den": q.denominator}


@dataclass(frozen=True)
class EdgeDeficiencyVector:
    """e[i] = (min over i-sets S of the F-edges meeting S) - 1, with e[0] = 0"""

    e: tuple[int, ...]
    v: int
    # Bitmask of one minimizing i-set per i (first found in Gray-code order)
    argmin_sets: tuple[int, ...] = field(default=(), compare=False)

    def __getitem__(self, i: int) -> int:
        return self.e[i]

    def to_json_dict(self) -> dict[str, Any]:
        return {"v": self.v, "e": list(self.e)}


@dataclass
class BoundProfile:
    """All invariants of one pattern needed by the bound formulas"""

    pattern: PatternGraph
    ed: EdgeDeficiencyVector
    gamma: Fraction
    gamma_argmin: int
    gstar: dict[int, list[int]]
    kset: tuple[int, ...]
    beta: int
    edge_conn: int
    flat: bool  # False when profile() skipped the flatness closure
    flat_witness: Edge | None
    window: int

    @property
    def v(self) -> int:
        return self.pattern.v

    @property
    def ell(self) -> int:
        return self.pattern.ell

    def gstar_at(self, r: int, i: int) -> int:
        """g*_r(i), extending the stored table on demand"""
        table = self.gstar[r]
        if i >= len(table):
            table[:] = gstar_extend(self.ed, r, table, i)
        return table[i]

    def kset_r(self, r: int) -> tuple[int, ...]:
        return tuple(i for i in self.kset if i <= self.v - r)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "pattern": self.pattern.to_json_dict(),
            "e": list(self.ed.e),
            "gamma": rational_json(self.gamma),
            "gamma_argmin": self.gamma_argmin,
            "gstar": {str(r): table for r, table in sorted(self.gstar.items())},
            "kset": list(self.kset),
            "kset_r": {str(r): list(self.kset_r(r)) for r in sorted(self.gstar)},
            "beta": self.beta,
            "edge_connectivity": self.edge_conn,
            "flat": self.flat,
            "flat_witness": list(self.flat_witness) if self.flat_witness else None,
            "wsat_v": self.ell - 1 if self.flat else None,
            "window": self.window,
        }


def gstar_extend(ed: EdgeDeficiencyVector, r: int, table: list[int], i_max: int) -> list[int]:
    """Min-plus unbounded-knapsack DP over parts of size <= v - r"""
    cap = ed.v - r
    a = list(table) or [0]
    for i in range(len(a), i_max + 1):
        a.append(min(ed.e[j] + a[i - j] for j in range(1, min(i, cap) + 1)))
    return a[: max(i_max + 1, len(table))]


class InvariantsService:
    """Computes pattern invariants"""

    def __init__(self, percolation: PercolationService | None = None):
        self.percolation = percolation or get_percolation_service()

    def edge_deficiency(self, f: PatternGraph) -> EdgeDeficiencyVector:
        v = f.v
        if v > config.SUBSET_ENUMERATION_CAP:
            raise CapacityError(
                f"subset enumeration over v={v} exceeds SUBSET_ENUMERATION_CAP="
                f"{config.SUBSET_ENUMERATION_CAP}"
            )
        adj = f.graph.adj
        best = [INF] * (v + 1)
        best_set = [0] * (v + 1)
        best[0] = 0
        # Gray-code walk: touching(S) changes by the edges from the flipped vertex
        # to the complement of S.
        subset = 0
        touching = 0
        size = 0
        for k in range(1, 1 << v):
            u = (k & -k).bit_length() - 1
            bit = 1 << u
            if subset & bit:
                subset ^= bit
                touching -= (adj[u] & ~subset).bit_count()
                size -= 1
            else:
                touching += (adj[u] & ~subset).bit_count()
                subset |= bit
                size += 1
            if touching < best[size]:
                best[size] = touching
                best_set[size] = subset
        e = [0] + [int(best[i]) - 1 for i in range(1, v + 1)]
        return EdgeDeficiencyVector(tuple(e), v, tuple(best_set))

    def gamma(self, ed: EdgeDeficiencyVector) -> Fraction:
        return self.gamma_with_argmin(ed)[0]

    def gamma_with_argmin(self, ed: EdgeDeficiencyVector) -> tuple[Fraction, int]:
        if ed.v < 2:
            raise ParameterError("gamma needs v >= 2")
        best = Fraction(ed.e[1], 1)
        arg = 1
        for i in range(2, ed.v):
            q = Fraction(ed.e[i], i)
            if q < best:
                best, arg = q, i
        return best, arg

    def gstar_table(self, ed: EdgeDeficiencyVector, r: int, i_max: int) -> list[int]:
        if not 0 <= r <= ed.v - 1:
            raise ParameterError(f"r must lie in 0..{ed.v - 1}, got {r}")
        if i_max < 0:
            raise ParameterError("i_max must be non-negative")
        return gstar_extend(ed, r, [0], i_max)

    def gstar_composition(self, ed: EdgeDeficiencyVector, r: int, i: int) -> list[int]:
        """An optimal composition of i into parts <= v - r.

        Ties: fewest parts, then lexicographically largest sequence of parts.
        """
        cap = ed.v - r
        value = self.gstar_table(ed, r, i)
        parts_count = [0] * (i + 1)
        for k in range(1, i + 1):
            parts_count[k] = min(
                1 + parts_count[k - j]
                for j in range(1, min(k, cap) + 1)
                if ed.e[j] + value[k - j] == value[k]
            )
        parts = []
        rest = i
        while rest:
            j = max(
                j
                for j in range(1, min(rest, cap) + 1)
                if ed.e[j] + value[rest - j] == value[rest]
                and 1 + parts_count[rest - j] == parts_count[rest]
            )
            parts.append(j)
            rest -= j
        return parts

    def kset(self, ed: EdgeDeficiencyVector) -> tuple[int, ...]:
        """i in K iff e_i is strictly below every decomposition into >= 2 parts"""
        v = ed.v
        d: list[float] = [INF] * (v + 1)
        members = []
        for i in range(1, v + 1):
            if i > 1:
                d[i] = min(ed.e[j] + min(ed.e[i - j], d[i - j]) for j in range(1, i))
            if ed.e[i] < d[i]:
                members.append(i)
        return tuple(members)

    def kset_r(self, ed: EdgeDeficiencyVector, r: int) -> tuple[int, ...]:
        return tuple(i for i in self.kset(ed) if i <= ed.v - r)

    def beta(self, f: PatternGraph) -> int:
        """Fewest deleted vertices leaving a graph with a cut-edge"""
        v = f.v
        if v > config.SUBSET_ENUMERATION_CAP:
            raise CapacityError(f"beta enumeration over v={v} exceeds the subset cap")
        vertices = range(v)
        for size in range(0, v - 1):
            for deleted in combinations(vertices, size):
                gone = set(deleted)
                rest = induced_subgraph(f.graph, [u for u in vertices if u not in gone])
                if has_cut_edge(rest):
                    return size
        return v - 2

    def flatness(self, f: PatternGraph) -> tuple[bool, Edge | None]:
        """wsat(v, F) = ell - 1, decided by one closure.

        closure(F - e) contains e, hence equals closure(F) for every edge e; so the
        first edge is as good a witness as any.
        """
        e = f.graph.edges()[0]
        start = remove_edge(f.graph, *e)
        flat = self.percolation.closure(f, start) == clique(f.v)
        return (True, e) if flat else (False, None)

    def profile(
        self, f: PatternGraph, i_max: int | None = None, with_flatness: bool = True
    ) -> BoundProfile:
        ed = self.edge_deficiency(f)
        gamma, arg = self.gamma_with_argmin(ed)
        window = config.PROPERTY_WINDOW_FACTOR * f.v
        top = window if i_max is None else max(i_max, window)
        gstar = {r: self.gstar_table(ed, r, top) for r in range(f.v)}
        flat, witness = self.flatness(f) if with_flatness else (False, None)
        profile = BoundProfile(
            pattern=f,
            ed=ed,
            gamma=gamma,
            gamma_argmin=arg,
            gstar=gstar,
            kset=self.kset(ed),
            beta=self.beta(f),
            edge_conn=f.edge_connectivity,
            flat=flat,
            flat_witness=witness,
            window=window,
        )
        logger.info(
            f"profile {f.label()}: v={f.v} ell={f.ell} delta={f.delta} gamma={gamma} "
            f"beta={profile.beta} flat={flat if with_flatness else 'unknown'}"
        )
        return profile

    def sparse_slope(self, f: PatternGraph, p: set[int] | frozenset[int]) -> Fraction:
        """(ell - |E(F restricted to V minus P)| - 1) / |P|"""
        outside = [u for u in range(f.v) if u not in p]
        inner = induced_subgraph(f.graph, outside).edge_count
        return Fraction(f.ell - inner - 1, len(p))


# Singleton instance
_invariants_service: InvariantsService | None = None


def get_invariants_service() -> InvariantsService:
    """Get or create the invariants service singleton"""
    global _invariants_service
    if _invariants_service is None:
        _invariants_service = InvariantsService()
    return _invariants_service
