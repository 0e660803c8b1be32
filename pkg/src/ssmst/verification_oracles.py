"""Independent checks: potentials, fragment classes, brute-force LCA, MST legitimacy and path maxima."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import mst_rules as mr
from . import nca_labeling as nl
from .graph_core import Edge, Graph, edge_key, kruskal_mst
from .state_model import NIL, Configuration, LabelPair, parent_forest, root_label


class CycleError(ValueError):
    """The parent graph contains a cycle, so depth-based potentials are undefined."""


def s_value(c: Configuration, v: int) -> int:
    return abs((c[v].size.count - 1) - sum(c[u].size.count for u in c.children(v)))


def depths(c: Configuration) -> dict[int, int]:
    """Depth of every node below its fragment root; raises CycleError on a parent cycle."""
    frags, cyc = parent_forest(c)
    if cyc:
        raise CycleError(f"parent cycle through {sorted(cyc)}")
    out = {}
    for root, _ in frags:
        out[root] = 0
        stack = [root]
        while stack:
            x = stack.pop()
            for y in c.children(x):
                out[y] = out[x] + 1
                stack.append(y)
    # a parent pointer to a non-neighbour leaves the node outside children(); treat it as a root
    for v in c:
        out.setdefault(v, 0)
    return out


def phi(c: Configuration) -> int:
    base = c.graph.n + 1
    dep = depths(c)
    return sum(base ** dep[v] for v in c if s_value(c, v) != 0)


def _minus(a, b) -> int:
    """Pairwise difference a ⊖ b over a's positions; b's missing entries count as (0, 0)."""
    total = 0
    for i, (x, dx) in enumerate(a):
        y, dy = b[i] if i < len(b) else (0, 0)
        total += abs(x - y) + abs(dx - dy)
    return total


def _last(ell):
    return ell[-1] if ell else LabelPair(0, 0)


def label_distance(c: Configuration, v: int) -> int:
    """L(v): zero exactly when v's label is consistent with its parent's (given correct sizes)."""
    s = c[v]
    base = s_value(c, v)
    if s.p is NIL or s.p not in c.graph.adj[v]:
        return base + abs(len(s.ell) - 1) + _minus(s.ell, root_label(v))
    ps = c[s.p]
    lv, lp = s.ell, ps.ell
    if ps.size.heavy == v:
        a, b = _last(lv), _last(lp)
        return (base + abs(len(lv) - len(lp)) + _minus(lv[:-1], lp[:-1])
                + abs(a.anchor - b.anchor) + abs(a.dist - b.dist - 1))
    return (base + abs(len(lv) - len(lp) - 1) + _minus(lv[:-1], lp)
            + _minus((_last(lv),), root_label(v)))


def lambda_(c: Configuration) -> int:
    n = c.graph.n
    dep = depths(c)
    return sum((n + 1) ** (n + 1 - dep[v]) for v in c if label_distance(c, v) != 0)


# --- fragments --------------------------------------------------------------

@dataclass(frozen=True)
class FragmentClass:
    root: int
    members: frozenset
    f1: bool
    f2: bool
    f3: bool
    f4: bool
    f5: bool

    @property
    def level(self) -> int:
        return sum((self.f1, self.f2, self.f3, self.f4, self.f5))


def classify_fragments(c: Configuration) -> list[FragmentClass]:
    """Nested membership flags per fragment: labeled, minimum found, newp fixed, newd fixed, copied."""
    frags, _ = parent_forest(c)
    out = []
    for root, members in frags:
        nodes = sorted(members)
        f1 = all(mr.correctF(c, v) for v in nodes)
        f2 = f1 and c[root].out is not None and all(c[v].out == mr.best_out(c, v) for v in nodes)
        f3 = f2 and not any(mr.change_newp(c, v) for v in nodes)
        f4 = f3 and not any(mr.change_newd(c, v) for v in nodes)
        f5 = f4 and not any(mr.copy_ready(c, v) for v in nodes)
        out.append(FragmentClass(root, members, f1, f2, f3, f4, f5))
    return out


# --- trees ------------------------------------------------------------------

def _root_path(parent: dict, v: int) -> list[int]:
    path = [v]
    seen = {v}
    while parent.get(path[-1]) is not None:
        nxt = parent[path[-1]]
        if nxt in seen:
            raise CycleError(f"parent cycle through {nxt}")
        seen.add(nxt)
        path.append(nxt)
    return path


def brute_force_lca(parent: dict, u: int, v: int) -> int | None:
    """Deepest common node of the two root paths, or None when u and v lie in different trees."""
    pu, pv = _root_path(parent, u), set(_root_path(parent, v))
    for x in pu:
        if x in pv:
            return x
    return None


def tree_path(parent: dict, u: int, v: int) -> list[int]:
    top = brute_force_lca(parent, u, v)
    if top is None:
        raise ValueError(f"{u} and {v} are in different trees")
    up = _root_path(parent, u)
    down = _root_path(parent, v)
    return up[:up.index(top) + 1] + list(reversed(down[:down.index(top)]))


def path_max_oracle(parent: dict, g: Graph, u: int, v: int) -> Edge | None:
    """Heaviest (by EdgeKey) tree edge on path(u, v); None when u == v."""
    if u == v:
        return None
    path = tree_path(parent, u, v)
    edges = [Edge(a, b, g.weight(a, b)) for a, b in zip(path, path[1:])]
    return max(edges, key=edge_key)


def parent_map(c: Configuration) -> dict:
    return {v: c[v].p for v in c}


class Verdict(str, Enum):
    LEGITIMATE = "LEGITIMATE"
    NOT_SPANNING = "NOT_SPANNING"
    NOT_TREE = "NOT_TREE"
    NOT_MINIMAL = "NOT_MINIMAL"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MstCheck:
    verdict: Verdict
    gap: int = 0
    weight: int | None = None

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.LEGITIMATE

    def __str__(self):
        if self.verdict is Verdict.NOT_MINIMAL:
            return f"NOT_MINIMAL({self.gap})"
        return str(self.verdict)


def tree_edges(c: Configuration) -> list[Edge]:
    return [Edge(v, c[v].p, c.graph.weight(v, c[v].p)) for v in c if c[v].p is not NIL]


def check_mst(c: Configuration, g: Graph | None = None) -> MstCheck:
    g = g or c.graph
    if any(c[v].p is not NIL and c[v].p not in g.adj[v] for v in c):
        return MstCheck(Verdict.NOT_TREE)
    frags, cyc = parent_forest(c)
    if cyc:
        return MstCheck(Verdict.NOT_TREE)
    if len(frags) != 1:
        return MstCheck(Verdict.NOT_SPANNING)
    weight = sum(e.w for e in tree_edges(c))
    gap = weight - kruskal_mst(g)[1]
    if gap:
        return MstCheck(Verdict.NOT_MINIMAL, gap, weight)
    return MstCheck(Verdict.LEGITIMATE, 0, weight)


def mst_gap(c: Configuration) -> int | None:
    """Tree weight minus the optimum, or None while the parent graph is not a spanning tree."""
    res = check_mst(c)
    if res.verdict in (Verdict.LEGITIMATE, Verdict.NOT_MINIMAL):
        return res.gap
    return None


def mst_configuration(g: Graph, root: int | None = None) -> Configuration:
    """Legitimately labeled configuration whose tree is the Kruskal MST, rooted at `root`."""
    chosen, _ = kruskal_mst(g)
    root = g.nodes[0] if root is None else root
    adj: dict[int, list[int]] = {v: [] for v in g.nodes}
    for e in chosen:
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    parent = {root: None}
    stack = [root]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                stack.append(y)
    return nl.tree_configuration(g, parent)
