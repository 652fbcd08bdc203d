"""
Percolation Service
F-bootstrap percolation: anchored embedding search, addable edges, closure,
deterministic traces and the weak-saturation test.

A non-edge e of H is addable when H+e contains a copy of F that uses e. Copies
are non-induced unless the service is built with induced=True.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any

from backend.config import config
from backend.services.errors import GraphEditError, GraphFormatError
from backend.services.graph_core import (
    Edge,
    LabeledGraph,
    PatternGraph,
    iter_bits,
    normalize_edge,
)
from backend.services.logger import get_logger

logger = get_logger("percolation")


@dataclass(frozen=True)
class TraceStep:
    """One activated edge with the copy of F that completed it"""

    edge: Edge
    embedding: tuple[int, ...]  # host vertex per pattern vertex

    def to_json_dict(self) -> dict[str, Any]:
        return {"edge": list(self.edge), "embedding": list(self.embedding)}

    def check_range(self, n: int) -> None:
        """Require 0 <= u < w < n and every embedded vertex in 0..n-1"""
        u, w = self.edge
        if not 0 <= u < w < n:
            raise GraphEditError(f"trace edge {{{u},{w}}} is not a pair of distinct vertices in 0..{n - 1}")
        bad = [x for x in self.embedding if not 0 <= x < n]
        if bad:
            raise GraphEditError(f"trace embedding uses vertices outside 0..{n - 1}: {bad}")


@dataclass(frozen=True)
class PercolationTrace:
    """Ordered activation record H_0 ⊂ H_1 ⊂ ... ⊂ H_m"""

    start: LabeledGraph
    steps: tuple[TraceStep, ...]
    final: LabeledGraph

    def replay(self) -> LabeledGraph:
        rows = list(self.start.adj)
        for step in self.steps:
            u, w = step.edge
            rows[u] |= 1 << w
            rows[w] |= 1 << u
        return LabeledGraph(self.start.n, tuple(rows))

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(step.to_json_dict()) for step in self.steps)

    @classmethod
    def from_jsonl(cls, start: LabeledGraph, text: str) -> PercolationTrace:
        steps = []
        offset = 0
        for line in text.splitlines(keepends=True):
            if line.strip():
                try:
                    record = json.loads(line)
                    edge = normalize_edge(*record["edge"])
                    step = TraceStep(edge, tuple(record["embedding"]))
                    step.check_range(start.n)
                    steps.append(step)
                except (ValueError, KeyError, TypeError) as e:
                    raise GraphFormatError(f"malformed trace line: {e}", offset) from e
            offset += len(line.encode("utf-8"))
        trace = cls(start, tuple(steps), start)
        return cls(start, trace.steps, trace.replay())

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "start": self.start.to_json_dict(),
            "steps": [step.to_json_dict() for step in self.steps],
            "final": self.final.to_json_dict(),
            "complete": self.final.is_complete(),
        }


@dataclass(frozen=True)
class _Plan:
    """Static search order for one anchored F-edge (a, b)"""

    order: tuple[int, ...]
    back: tuple[tuple[int, ...], ...]  # earlier positions adjacent in F
    anti: tuple[tuple[int, ...], ...]  # earlier positions non-adjacent in F
    prev_twin: tuple[int, ...]  # earlier classmate whose image must be smaller, or -1
    deg: tuple[int, ...]


class CompiledPattern:
    """Pattern F preprocessed for repeated embedding searches"""

    def __init__(self, f: PatternGraph):
        self.pattern = f
        self.adj = f.graph.adj
        self.v = f.v
        self.ell = f.ell
        self.delta = f.delta
        self.degrees = f.graph.degrees()
        self.max_degree = max(self.degrees)
        self.degrees_desc = sorted(self.degrees, reverse=True)
        self.twin_class = self._twin_classes()
        self.diameter = self._diameter() if f.connected else None
        self.plans = [self._plan(a, b) for a, b in self._anchors()]

    def _twin_classes(self) -> list[int]:
        """Class id per vertex: equal closed neighbourhoods, else equal open ones.

        A vertex with a non-trivial closed-twin class has no open twin, so this is
        a partition; permuting inside a class is an automorphism of F.
        """
        v = self.v
        closed: dict[int, list[int]] = {}
        opened: dict[int, list[int]] = {}
        for u in range(v):
            closed.setdefault(self.adj[u] | 1 << u, []).append(u)
            opened.setdefault(self.adj[u], []).append(u)
        cls = [-1] * v
        for members in closed.values():
            if len(members) > 1:
                for u in members:
                    cls[u] = members[0]
        for u in range(v):
            if cls[u] < 0:
                cls[u] = opened[self.adj[u]][0]
        return cls

    def _members(self, c: int) -> list[int]:
        return [u for u in range(self.v) if self.twin_class[u] == c]

    def _anchors(self) -> list[tuple[int, int]]:
        seen: list[tuple[int, int]] = []
        for x in range(self.v):
            for y in iter_bits(self.adj[x]):
                a = self._members(self.twin_class[x])[0]
                b = next(u for u in self._members(self.twin_class[y]) if u != a)
                if (a, b) not in seen:
                    seen.append((a, b))
        return seen

    def _plan(self, a: int, b: int) -> _Plan:
        order = [a, b]
        placed = 1 << a | 1 << b
        while len(order) < self.v:
            best = max(
                (u for u in range(self.v) if not placed >> u & 1),
                key=lambda u: ((self.adj[u] & placed).bit_count(), self.degrees[u], -u),
            )
            order.append(best)
            placed |= 1 << best
        position = {u: p for p, u in enumerate(order)}
        back, anti, prev_twin = [], [], []
        last_in_class: dict[int, int] = {}
        for p, u in enumerate(order):
            back.append(tuple(q for q in range(p) if self.adj[u] >> order[q] & 1))
            anti.append(tuple(q for q in range(p) if not self.adj[u] >> order[q] & 1))
            if p < 2:
                prev_twin.append(-1)
                continue
            c = self.twin_class[u]
            prev = last_in_class.get(c)
            prev_twin.append(position[prev] if prev is not None else -1)
            last_in_class[c] = u
        return _Plan(
            order=tuple(order),
            back=tuple(back),
            anti=tuple(anti),
            prev_twin=tuple(prev_twin),
            deg=tuple(self.degrees[u] for u in order),
        )

    def _diameter(self) -> int:
        full = (1 << self.v) - 1
        worst = 0
        for s in range(self.v):
            reach = frontier = 1 << s
            depth = 0
            while reach != full:
                nxt = 0
                for u in iter_bits(frontier):
                    nxt |= self.adj[u]
                frontier = nxt & ~reach
                if not frontier:
                    break
                reach |= frontier
                depth += 1
            worst = max(worst, depth)
        return worst


class _Host:
    """Mutable host graph used inside closure computations"""

    def __init__(self, g: LabeledGraph):
        self.n = g.n
        self.adj = list(g.adj)
        self.deg = [row.bit_count() for row in self.adj]
        self.edge_count = g.edge_count
        self._twins: list[int] | None = None

    def has(self, u: int, w: int) -> bool:
        return bool(self.adj[u] >> w & 1)

    def add(self, u: int, w: int) -> None:
        self.adj[u] |= 1 << w
        self.adj[w] |= 1 << u
        self.deg[u] += 1
        self.deg[w] += 1
        self.edge_count += 1
        self._twins = None

    def remove(self, u: int, w: int) -> None:
        self.adj[u] &= ~(1 << w)
        self.adj[w] &= ~(1 << u)
        self.deg[u] -= 1
        self.deg[w] -= 1
        self.edge_count -= 1
        self._twins = None

    def non_edges(self) -> list[Edge]:
        full = (1 << self.n) - 1
        result = []
        for u in range(self.n):
            missing = ~self.adj[u] & full & ~((2 << u) - 1)
            result.extend((u, w) for w in iter_bits(missing))
        return result

    def twins(self) -> list[int]:
        if self._twins is None:
            self._twins = [self._twin_row(x) for x in range(self.n)]
        return self._twins

    def patched_twins(self, cached: list[int], u: int, w: int) -> list[int]:
        """Twin masks after edge {u, w} changed, from the masks before the change.

        Only pairs meeting {u, w} can change status.
        """
        base = list(cached)
        clear = ~(1 << u | 1 << w)
        for x in range(self.n):
            base[x] &= clear
        base[u] = self._twin_row(u)
        base[w] = self._twin_row(w)
        for z in (u, w):
            for y in iter_bits(base[z]):
                base[y] |= 1 << z
        return base

    def _twin_row(self, x: int) -> int:
        row = 0
        ax = self.adj[x]
        for y in range(self.n):
            if y != x:
                keep = ~(1 << x | 1 << y)
                if ax & keep == self.adj[y] & keep:
                    row |= 1 << y
        return row

    def ball(self, seeds: int, radius: int) -> int:
        reach = frontier = seeds
        for _ in range(radius):
            nxt = 0
            for u in iter_bits(frontier):
                nxt |= self.adj[u]
            frontier = nxt & ~reach
            if not frontier:
                break
            reach |= frontier
        return reach

    def snapshot(self) -> LabeledGraph:
        return LabeledGraph(self.n, tuple(self.adj))


class PercolationService:
    """F-bootstrap percolation engine"""

    def __init__(self, induced: bool | None = None):
        self.induced = config.INDUCED_COPIES if induced is None else induced
        self._compiled: dict[LabeledGraph, CompiledPattern] = {}

    def compile(self, f: PatternGraph) -> CompiledPattern:
        cp = self._compiled.get(f.graph)
        if cp is None:
            cp = CompiledPattern(f)
            self._compiled[f.graph] = cp
            logger.debug(
                f"Compiled pattern {f.label()}: {len(cp.plans)} anchors, diameter {cp.diameter}"
            )
        return cp

    # Embedding search

    def find_embedding_using_edge(
        self, f: PatternGraph, h: LabeledGraph, e: Edge
    ) -> tuple[int, ...] | None:
        """Injective edge-preserving map V(F) -> V(h) with some F-edge onto e, or None"""
        u, w = normalize_edge(*e)
        if not h.has_edge(u, w):
            raise GraphEditError(f"anchor {{{u},{w}}} is not an edge of the host")
        host = _Host(h)
        return self._embed(self.compile(f), host, u, w, host.twins())

    def _embed(
        self, cp: CompiledPattern, host: _Host, e0: int, e1: int, twins: list[int]
    ) -> tuple[int, ...] | None:
        n = host.n
        if n < cp.v or host.edge_count < cp.ell:
            return None
        host_desc = sorted(host.deg, reverse=True)
        if any(hd < fd for hd, fd in zip(host_desc, cp.degrees_desc)):
            return None

        hadj = host.adj
        deg_masks = [0] * (cp.max_degree + 1)
        for x in range(n):
            d = min(host.deg[x], cp.max_degree)
            deg_masks[d] |= 1 << x
        for d in range(cp.max_degree - 1, -1, -1):
            deg_masks[d] |= deg_masks[d + 1]

        induced = self.induced
        v = cp.v
        full = (1 << n) - 1
        img = [0] * v

        for plan in cp.plans:
            if host.deg[e0] < plan.deg[0] or host.deg[e1] < plan.deg[1]:
                continue
            back, anti, prev_twin, pdeg = plan.back, plan.anti, plan.prev_twin, plan.deg
            img[0], img[1] = e0, e1

            def place(p: int, used: int) -> bool:
                if p == v:
                    return True
                q = back[p]
                if q:
                    cand = hadj[img[q[0]]]
                    for r in q[1:]:
                        cand &= hadj[img[r]]
                else:
                    cand = full
                cand &= deg_masks[pdeg[p]] & ~used
                if induced:
                    for r in anti[p]:
                        cand &= ~hadj[img[r]]
                t = prev_twin[p]
                if t >= 0:
                    cand &= ~((2 << img[t]) - 1)
                tried = 0
                while cand:
                    low = cand & -cand
                    cand ^= low
                    x = low.bit_length() - 1
                    if twins[x] & tried:
                        continue
                    tried |= low
                    img[p] = x
                    if place(p + 1, used | low):
                        return True
                return False

            if place(2, 1 << e0 | 1 << e1):
                embedding = [0] * v
                for p, u in enumerate(plan.order):
                    embedding[u] = img[p]
                return tuple(embedding)
        return None

    def _test(self, cp: CompiledPattern, host: _Host, e: Edge) -> tuple[int, ...] | None:
        """Addability of the non-edge e in the current host"""
        u, w = e
        cached = host.twins()
        host.add(u, w)
        try:
            return self._embed(cp, host, u, w, host.patched_twins(cached, u, w))
        finally:
            host.remove(u, w)
            host._twins = cached

    # Percolation

    def addable_edges(self, f: PatternGraph, h: LabeledGraph) -> list[Edge]:
        cp = self.compile(f)
        host = _Host(h)
        return [e for e in host.non_edges() if self._test(cp, host, e) is not None]

    def closure(self, f: PatternGraph, h: LabeledGraph) -> LabeledGraph:
        cp = self.compile(f)
        host = _Host(h)
        self._saturate(cp, host)
        result = host.snapshot()
        logger.debug(
            f"closure of {h!r} under {f.label()}: {result.edge_count - h.edge_count} edges added"
        )
        return result

    def _saturate(self, cp: CompiledPattern, host: _Host) -> None:
        pending = host.non_edges()
        full_sweep = True
        while pending:
            added: list[Edge] = []
            for e in pending:
                if host.has(*e):
                    continue
                if self._test(cp, host, e) is not None:
                    host.add(*e)
                    added.append(e)
            if added:
                pending = self._retest_candidates(cp, host, added)
                full_sweep = cp.diameter is None
            elif not full_sweep:
                # Fallback sweep confirming the fixpoint
                pending = host.non_edges()
                full_sweep = True
            else:
                break

    def _retest_candidates(self, cp: CompiledPattern, host: _Host, added: Iterable[Edge]) -> list[Edge]:
        if cp.diameter is None:
            return host.non_edges()
        seeds = 0
        for u, w in added:
            seeds |= 1 << u | 1 << w
        reach = host.ball(seeds, cp.diameter)
        return [(u, w) for u, w in host.non_edges() if (reach >> u | reach >> w) & 1]

    def trace(self, f: PatternGraph, h: LabeledGraph) -> PercolationTrace:
        """Closure with witnesses; each step adds the lexicographically smallest addable edge"""
        cp = self.compile(f)
        host = _Host(h)
        steps: list[TraceStep] = []
        clean: set[Edge] = set()
        while True:
            found = None
            for e in host.non_edges():
                if e in clean:
                    continue
                embedding = self._test(cp, host, e)
                if embedding is not None:
                    found = TraceStep(e, embedding)
                    break
                clean.add(e)
            if found is None:
                break
            host.add(*found.edge)
            steps.append(found)
            if cp.diameter is None:
                clean.clear()
            else:
                u, w = found.edge
                reach = host.ball(1 << u | 1 << w, cp.diameter)
                clean = {(a, b) for a, b in clean if not (reach >> a | reach >> b) & 1}
        return PercolationTrace(h, tuple(steps), host.snapshot())

    def is_weakly_saturated(self, f: PatternGraph, h: LabeledGraph, n: int | None = None) -> bool:
        if n is not None and n != h.n:
            raise GraphEditError(f"host has {h.n} vertices, expected {n}")
        if h.is_complete():
            return True
        # Degree floor: a vertex's first activation needs delta-1 prior edges
        floor = min(f.delta - 1, h.n - 1)
        if any(d < floor for d in h.degrees()):
            return False
        return self.closure(f, h).is_complete()

    def verify_trace(self, f: PatternGraph, t: PercolationTrace) -> bool:
        """Replay check plus witness soundness for every step; out-of-range vertices raise GraphEditError"""
        rows = list(t.start.adj)
        for step in t.steps:
            step.check_range(t.start.n)
            u, w = step.edge
            if rows[u] >> w & 1:
                return False
            rows[u] |= 1 << w
            rows[w] |= 1 << u
            emb = step.embedding
            if len(emb) != f.v or len(set(emb)) != f.v:
                return False
            covers = False
            for a, b in f.graph.edges():
                x, y = emb[a], emb[b]
                if not rows[x] >> y & 1:
                    return False
                covers = covers or normalize_edge(x, y) == step.edge
            if not covers:
                return False
        return LabeledGraph(t.start.n, tuple(rows)) == t.final


# Singleton instance
_percolation_service: PercolationService | None = None


def get_percolation_service() -> PercolationService:
    """Get or create the percolation service singleton"""
    global _percolation_service
    if _percolation_service is None:
        _percolation_service = PercolationService()
    return _percolation_service
