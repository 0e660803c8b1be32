"""Immutable weighted graphs, generators, edge-list I/O and the Kruskal oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple


class EdgeKey(NamedTuple):
    w: int
    lo: int
    hi: int


@dataclass(frozen=True, slots=True, order=True)
class Edge:
    u: int
    v: int
    w: int

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"self-loop at node {self.u}")
        if self.u > self.v:
            lo, hi = self.v, self.u
            object.__setattr__(self, "u", lo)
            object.__setattr__(self, "v", hi)

    @property
    def key(self) -> EdgeKey:
        return EdgeKey(self.w, self.u, self.v)


def edge_key(e: Edge) -> EdgeKey:
    return EdgeKey(e.w, min(e.u, e.v), max(e.u, e.v))


class GraphError(ValueError):
    """Base class for rejected graph input. `line` is 1-based, or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MalformedLine(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


@dataclass(frozen=True)
class Graph:
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    adj: dict[int, dict[int, int]] = field(repr=False, compare=False)

    @classmethod
    def build(cls, nodes: Iterable[int], edges: Iterable[Edge]) -> "Graph":
        nodes = tuple(sorted(set(nodes)))
        adj: dict[int, dict[int, int]] = {v: {} for v in nodes}
        kept = []
        for e in edges:
            if e.u not in adj or e.v not in adj:
                raise GraphError(f"edge {e.u}-{e.v} names an unknown node")
            if e.v in adj[e.u]:
                raise DuplicateEdge(f"duplicate edge {e.u}-{e.v}")
            if e.w < 1:
                raise NonPositiveWeight(f"non-positive weight {e.w}")
            adj[e.u][e.v] = e.w
            adj[e.v][e.u] = e.w
            kept.append(e)
        g = cls(nodes, tuple(sorted(kept, key=edge_key)), adj)
        if not g.is_connected():
            raise DisconnectedGraph("graph is not connected")
        return g

    @property
    def n(self) -> int:
        return len(self.nodes)

    def neighbors(self, v: int) -> dict[int, int]:
        return self.adj[v]

    def weight(self, u: int, v: int) -> int:
        return self.adj[u][v]

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            x = stack.pop()
            for y in self.adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.nodes)


def parse_graph(text: str) -> Graph:
    lines = text.splitlines()
    if not lines:
        raise MalformedLine("empty input", 1)
    head = lines[0].split()
    try:
        if len(head) != 2:
            raise ValueError
        n, m = int(head[0]), int(head[1])
        if n < 0 or m < 0:
            raise ValueError
    except ValueError:
        raise MalformedLine(f"expected 'n m', got {lines[0]!r}", 1) from None

    body = [(i + 2, ln) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != m:
        raise MalformedLine(f"header announces {m} edges, found {len(body)}", len(lines))

    nodes: set[int] = set()
    edges: list[Edge] = []
    seen: set[tuple[int, int]] = set()
    for lineno, ln in body:
        parts = ln.split()
        try:
            if len(parts) != 3:
                raise ValueError
            u, v, w = (int(x) for x in parts)
            if u < 0 or v < 0:
                raise ValueError
        except ValueError:
            raise MalformedLine(f"expected 'u v w', got {ln!r}", lineno) from None
        if u == v:
            raise SelfLoop(f"self-loop at node {u}", lineno)
        if w < 1:
            raise NonPositiveWeight(f"weight {w} is not positive", lineno)
        pair = (min(u, v), max(u, v))
        if pair in seen:
            raise DuplicateEdge(f"duplicate edge {pair[0]}-{pair[1]}", lineno)
        seen.add(pair)
        nodes.update(pair)
        edges.append(Edge(u, v, w))

    if n == 1 and not nodes:
        nodes = {0}
    if len(nodes) != n:
        # isolated nodes cannot be named in an edge list, so the graph is split
        raise DisconnectedGraph(f"header announces {n} nodes, edges touch {len(nodes)}", 1)
    adj: dict[int, dict[int, int]] = {x: {} for x in nodes}
    for e in edges:
        adj[e.u][e.v] = e.w
        adj[e.v][e.u] = e.w
    g = Graph(tuple(sorted(nodes)), tuple(sorted(edges, key=edge_key)), adj)
    if not g.is_connected():
        raise DisconnectedGraph("graph is not connected", len(lines))
    return g


def format_graph(g: Graph) -> str:
    out = [f"{g.n} {len(g.edges)}"]
    out += [f"{e.u} {e.v} {e.w}" for e in g.edges]
    return "\n".join(out) + "\n"


def generate_graph(n: int, model: str, weight_range: tuple[int, int], seed: int,
                   p: float = 0.5) -> Graph:
    """Deterministic graph on nodes 0..n-1. `model` is path, cycle, complete or random."""
    if n <= 0:
        raise GraphError("n must be at least 1")
    lo, hi = weight_range
    if lo < 1:
        raise NonPositiveWeight(f"weight range starts at {lo}")
    if lo > hi:
        raise GraphError(f"empty weight range ({lo},{hi})")
    rng = random.Random(seed)
    nodes = range(n)

    if model == "path":
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif model == "cycle":
        pairs = [(i, i + 1) for i in range(n - 1)]
        if n >= 3:
            pairs.append((0, n - 1))
    elif model == "complete":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif model == "random":
        if not 0.0 < p <= 1.0:
            raise GraphError(f"edge probability {p} outside (0,1]")
        while True:
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
            if _connected(n, pairs):
                break
    else:
        raise GraphError(f"unknown model {model!r}")

    edges = [Edge(u, v, rng.randint(lo, hi)) for u, v in pairs]
    return Graph.build(nodes, edges)


def _connected(n: int, pairs) -> bool:
    uf = UnionFind(range(n))
    for u, v in pairs:
        uf.union(u, v)
    return len({uf.find(x) for x in range(n)}) <= 1


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


@lru_cache(maxsize=256)
def kruskal_mst(g: Graph) -> tuple[frozenset[Edge], int]:
    uf = UnionFind(g.nodes)
    chosen = []
    for e in sorted(g.edges, key=edge_key):
        if uf.union(e.u, e.v):
            chosen.append(e)
    return frozenset(chosen), sum(e.w for e in chosen)
