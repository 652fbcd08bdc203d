"""
Graph core
Bitset-backed simple graphs, validated pattern graphs, graph6 / JSON codecs and
elementary structure queries shared by every other service.

Vertices are dense 0-based integers. Adjacency rows are Python ints used as
bitsets, so graphs beyond 64 vertices need no special casing.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from typing import Any

import networkx as nx

from backend.config import config
from backend.services.errors import (
    CapacityError,
    GraphEditError,
    GraphFormatError,
    PatternError,
)

Edge = tuple[int, int]


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of mask in increasing order"""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for u in vertices:
        mask |= 1 << u
    return mask


def normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, slots=True)
class LabeledGraph:
    """Simple undirected graph on {0..n-1} with bitset adjacency rows"""

    n: int
    adj: tuple[int, ...]
    edge_count: int = field(init=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise GraphEditError(f"vertex count must be non-negative, got {self.n}")
        if self.n > config.MAX_VERTICES:
            raise CapacityError(
                f"graph on {self.n} vertices exceeds MAX_VERTICES={config.MAX_VERTICES}"
            )
        if len(self.adj) != self.n:
            raise GraphEditError(f"expected {self.n} adjacency rows, got {len(self.adj)}")
        full = (1 << self.n) - 1
        total = 0
        for u, row in enumerate(self.adj):
            if row & ~full:
                raise GraphEditError(f"row {u} references a vertex outside 0..{self.n - 1}")
            if row >> u & 1:
                raise GraphEditError(f"loop at vertex {u}")
            for w in iter_bits(row):
                if not self.adj[w] >> u & 1:
                    raise GraphEditError(f"asymmetric adjacency between {u} and {w}")
            total += row.bit_count()
        object.__setattr__(self, "edge_count", total // 2)

    # Constructors

    @classmethod
    def empty(cls, n: int) -> LabeledGraph:
        return cls(n, (0,) * n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> LabeledGraph:
        rows = [0] * n
        for u, v in edges:
            _check_vertex(n, u)
            _check_vertex(n, v)
            if u == v:
                raise GraphEditError(f"loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @classmethod
    def from_rows(cls, rows: Iterable[int]) -> LabeledGraph:
        rows = tuple(rows)
        return cls(len(rows), rows)

    # Queries

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and bool(self.adj[u] >> v & 1)

    def degree(self, u: int) -> int:
        return self.adj[u].bit_count()

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self.adj]

    def neighbors(self, u: int) -> list[int]:
        return list(iter_bits(self.adj[u]))

    def edges(self) -> list[Edge]:
        """Edges in lexicographic (min endpoint, max endpoint) order"""
        return [(u, w) for u in range(self.n) for w in iter_bits(self.adj[u] >> (u + 1) << (u + 1))]

    def non_edges(self) -> list[Edge]:
        full = (1 << self.n) - 1
        result = []
        for u in range(self.n):
            missing = ~self.adj[u] & full & ~((1 << (u + 1)) - 1)
            result.extend((u, w) for w in iter_bits(missing))
        return result

    def is_complete(self) -> bool:
        return self.edge_count == self.n * (self.n - 1) // 2

    def is_subgraph_of(self, other: LabeledGraph) -> bool:
        """Edge-set inclusion on the same vertex set"""
        return self.n == other.n and all(a & ~b == 0 for a, b in zip(self.adj, other.adj))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    def to_json_dict(self) -> dict[str, Any]:
        return {"n": self.n, "edges": [list(e) for e in self.edges()], "graph6": to_graph6(self)}

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> LabeledGraph:
        try:
            n = int(data["n"])
            edges = [(int(u), int(v)) for u, v in data["edges"]]
        except (KeyError, TypeError, ValueError) as e:
            raise GraphFormatError(f"malformed adjacency JSON: {e}", 0) from e
        return cls.from_edges(n, edges)

    def __repr__(self) -> str:
        return f"LabeledGraph(n={self.n}, edges={self.edge_count})"


def _check_vertex(n: int, u: int) -> None:
    if not 0 <= u < n:
        raise GraphEditError(f"vertex {u} outside 0..{n - 1}")


# Primitives


def clique(n: int) -> LabeledGraph:
    full = (1 << n) - 1
    return LabeledGraph(n, tuple(full & ~(1 << u) for u in range(n)))


def disjoint_union(a: LabeledGraph, b: LabeledGraph) -> LabeledGraph:
    """a on 0..a.n-1, b shifted to a.n..a.n+b.n-1"""
    return LabeledGraph(a.n + b.n, a.adj + tuple(row << a.n for row in b.adj))


def add_edge(g: LabeledGraph, u: int, v: int) -> LabeledGraph:
    _check_vertex(g.n, u)
    _check_vertex(g.n, v)
    if u == v or g.has_edge(u, v):
        raise GraphEditError(f"cannot add edge {{{u},{v}}}: loop or already present")
    rows = list(g.adj)
    rows[u] |= 1 << v
    rows[v] |= 1 << u
    return LabeledGraph(g.n, tuple(rows))


def remove_edge(g: LabeledGraph, u: int, v: int) -> LabeledGraph:
    _check_vertex(g.n, u)
    _check_vertex(g.n, v)
    if not g.has_edge(u, v):
        raise GraphEditError(f"cannot remove edge {{{u},{v}}}: not present")
    rows = list(g.adj)
    rows[u] &= ~(1 << v)
    rows[v] &= ~(1 << u)
    return LabeledGraph(g.n, tuple(rows))


def add_edges(g: LabeledGraph, edges: Iterable[Edge]) -> LabeledGraph:
    """Add several new edges at once; every edge must be absent"""
    rows = list(g.adj)
    for u, v in edges:
        _check_vertex(g.n, u)
        _check_vertex(g.n, v)
        if u == v or rows[u] >> v & 1:
            raise GraphEditError(f"cannot add edge {{{u},{v}}}: loop or already present")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return LabeledGraph(g.n, tuple(rows))


def induced_subgraph(g: LabeledGraph, keep: Iterable[int]) -> LabeledGraph:
    """Subgraph induced on keep, relabeled order-preservingly"""
    kept = sorted(set(keep))
    for u in kept:
        _check_vertex(g.n, u)
    index = {u: i for i, u in enumerate(kept)}
    keep_mask = mask_of(kept)
    rows = []
    for u in kept:
        row = 0
        for w in iter_bits(g.adj[u] & keep_mask):
            row |= 1 << index[w]
        rows.append(row)
    return LabeledGraph(len(kept), tuple(rows))


def min_degree(g: LabeledGraph) -> int:
    return min((row.bit_count() for row in g.adj), default=0)


def is_connected(g: LabeledGraph) -> bool:
    if g.n <= 1:
        return True
    return nx.is_connected(g.to_networkx())


def has_cut_edge(g: LabeledGraph) -> bool:
    return g.edge_count > 0 and nx.has_bridges(g.to_networkx())


def edge_connectivity(g: LabeledGraph) -> int:
    """Edge connectivity; 0 for disconnected graphs and for n < 2"""
    if g.n < 2 or not is_connected(g):
        return 0
    return int(nx.edge_connectivity(g.to_networkx()))


# graph6

_G6_MIN = 63
_G6_MAX = 126


def _encode_size(n: int) -> bytes:
    if n <= 62:
        return bytes([n + _G6_MIN])
    if n <= 258047:
        return bytes([_G6_MAX] + [((n >> s) & 63) + _G6_MIN for s in (12, 6, 0)])
    return bytes([_G6_MAX, _G6_MAX] + [((n >> s) & 63) + _G6_MIN for s in (30, 24, 18, 12, 6, 0)])


def to_graph6(g: LabeledGraph) -> str:
    """graph6 encoding (no header) of g under its current labeling"""
    out = bytearray(_encode_size(g.n))
    acc = 0
    width = 0
    for j in range(1, g.n):
        row = g.adj[j]
        for i in range(j):
            acc = acc << 1 | (row >> i & 1)
            width += 1
            if width == 6:
                out.append(acc + _G6_MIN)
                acc = 0
                width = 0
    if width:
        out.append((acc << (6 - width)) + _G6_MIN)
    return out.decode("ascii")


def parse_graph6(text: str) -> LabeledGraph:
    """Decode a graph6 string; errors name the offending byte offset"""
    data = text.rstrip("\r\n")
    for offset, ch in enumerate(data):
        if not _G6_MIN <= ord(ch) <= _G6_MAX:
            raise GraphFormatError(f"byte {ch!r} outside the graph6 range 63..126", offset)
    raw = data.encode("ascii")
    if not raw:
        raise GraphFormatError("empty graph6 string", 0)

    if raw[0] != _G6_MAX:
        n, pos = raw[0] - _G6_MIN, 1
    elif len(raw) >= 2 and raw[1] == _G6_MAX:
        if len(raw) < 8:
            raise GraphFormatError("truncated 8-byte size header", len(raw))
        n, pos = 0, 8
        for b in raw[2:8]:
            n = n << 6 | (b - _G6_MIN)
    else:
        if len(raw) < 4:
            raise GraphFormatError("truncated 4-byte size header", len(raw))
        n, pos = 0, 4
        for b in raw[1:4]:
            n = n << 6 | (b - _G6_MIN)

    if n > config.MAX_VERTICES:
        raise CapacityError(f"graph6 declares {n} vertices, above MAX_VERTICES={config.MAX_VERTICES}")

    nbits = n * (n - 1) // 2
    nbytes = (nbits + 5) // 6
    body = raw[pos:]
    if len(body) < nbytes:
        raise GraphFormatError(f"expected {nbytes} data bytes, found {len(body)}", len(raw))
    if len(body) > nbytes:
        raise GraphFormatError("trailing garbage after adjacency data", pos + nbytes)

    rows = [0] * n
    k = 0
    for j in range(1, n):
        for i in range(j):
            byte = body[k // 6] - _G6_MIN
            if byte >> (5 - k % 6) & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
            k += 1
    if nbytes and (body[-1] - _G6_MIN) & ((1 << (nbytes * 6 - nbits)) - 1):
        raise GraphFormatError("non-zero padding bits", pos + nbytes - 1)
    return LabeledGraph(n, tuple(rows))


# Patterns


@dataclass(frozen=True)
class PatternGraph:
    """A validated pattern F: no isolated vertices, with cached v, ell, delta"""

    graph: LabeledGraph
    v: int
    ell: int
    delta: int
    connected: bool
    two_edge_connected: bool
    edge_connectivity: int
    name: str | None = None

    @classmethod
    def from_graph(
        cls, g: LabeledGraph, *, strip_isolated: bool = False, name: str | None = None
    ) -> PatternGraph:
        isolated = [u for u in range(g.n) if g.adj[u] == 0]
        if isolated:
            if not strip_isolated:
                raise PatternError(f"pattern has isolated vertices {isolated}")
            g = induced_subgraph(g, [u for u in range(g.n) if g.adj[u]])
        if g.edge_count == 0:
            raise PatternError("pattern must have at least one edge")
        connected = is_connected(g)
        kappa = edge_connectivity(g) if connected else 0
        return cls(
            graph=g,
            v=g.n,
            ell=g.edge_count,
            delta=min_degree(g),
            connected=connected,
            two_edge_connected=kappa >= 2,
            edge_connectivity=kappa,
            name=name,
        )

    @property
    def lam(self) -> int:
        """I(connected) + I(2-edge-connected)"""
        return int(self.connected) + int(self.two_edge_connected)

    def label(self) -> str:
        return self.name or to_graph6(self.graph)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "graph6": to_graph6(self.graph),
            "v": self.v,
            "ell": self.ell,
            "delta": self.delta,
            "connected": self.connected,
            "two_edge_connected": self.two_edge_connected,
            "edge_connectivity": self.edge_connectivity,
        }
