"""Per-node registers, labels and whole-system configurations."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, NamedTuple

from .graph_core import Graph

NIL = None
INF = math.inf


class LabelPair(NamedTuple):
    anchor: int
    dist: int


Label = tuple  # tuple[LabelPair, ...]


class SizeInfo(NamedTuple):
    count: int
    heavy: int | None


class OutSel(NamedTuple):
    """Selected outgoing edge: weight plus endpoints (lo, hi)."""
    w: int
    edge: tuple[int, int]

    @property
    def key(self):
        return (self.w, self.edge[0], self.edge[1])


class _Unknown:
    """Out value of a node that has not yet heard from its whole subtree."""

    __slots__ = ()

    def __repr__(self):
        return "UNKNOWN"

    def __reduce__(self):
        return "UNKNOWN"


UNKNOWN = _Unknown()


class InSel(NamedTuple):
    """Selected internal edge: weight plus both endpoint labels."""
    w: int
    la: Label
    lb: Label


@dataclass(frozen=True, slots=True)
class NodeState:
    p: int | None
    d: int
    size: SizeInfo
    ell: Label
    out: OutSel | _Unknown | None
    in_sel: InSel | None
    newp: int | None
    newd: float  # int, or INF

    def but(self, **changes) -> "NodeState":
        return replace(self, **changes)


def root_label(v: int) -> Label:
    return (LabelPair(v, 0),)


class Configuration(Mapping):
    """Immutable snapshot: node id -> NodeState over a fixed graph."""

    __slots__ = ("graph", "_states", "_children", "_memo")

    def __init__(self, graph: Graph, states: Mapping[int, NodeState]):
        if set(states) != set(graph.nodes):
            raise ValueError("configuration must cover exactly the graph's nodes")
        self.graph = graph
        self._states = dict(states)
        self._children: dict[int, list[int]] | None = None
        self._memo: dict = {}

    def __getitem__(self, v: int) -> NodeState:
        return self._states[v]

    def __iter__(self) -> Iterator[int]:
        return iter(self.graph.nodes)

    def __len__(self) -> int:
        return len(self._states)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.graph == other.graph and self._states == other._states

    __hash__ = None

    def updated(self, changes: Mapping[int, NodeState]) -> "Configuration":
        merged = dict(self._states)
        merged.update(changes)
        out = Configuration(self.graph, merged)
        if self._children is not None and all(s.p == self._states[v].p for v, s in changes.items()):
            out._children = self._children  # same parent pointers, same child lists
        return out

    def memo(self, key, compute):
        """Derived value cached on this snapshot; safe because snapshots never change."""
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    def children(self, v: int) -> list[int]:
        if self._children is None:
            kids: dict[int, list[int]] = {x: [] for x in self.graph.nodes}
            for x, s in self._states.items():
                if s.p is not None and s.p in kids and s.p in self.graph.adj[x]:
                    kids[s.p].append(x)
            self._children = kids
        return self._children[v]


def singleton_configuration(g: Graph) -> Configuration:
    return Configuration(g, {
        v: NodeState(p=NIL, d=0, size=SizeInfo(1, NIL), ell=root_label(v),
                     out=None, in_sel=None, newp=NIL, newd=0)
        for v in g.nodes
    })


def _random_label(rng: random.Random, nodes, max_len: int, max_dist: int) -> Label:
    k = rng.randint(0, max_len)
    return tuple(LabelPair(rng.choice(nodes), rng.randint(0, max_dist)) for _ in range(k))


def arbitrary_configuration(g: Graph, seed: int) -> Configuration:
    """Every register drawn uniformly from a bounded domain; deterministic in `seed`."""
    rng = random.Random(seed)
    n = g.n
    top = 2 * n
    nodes = list(g.nodes)
    max_len = math.ceil(math.log2(n)) + 2 if n > 1 else 2
    edges = list(g.edges)
    states = {}
    for v in g.nodes:
        nbrs = sorted(g.adj[v])
        choices = nbrs + [NIL]
        out = rng.choice((None, UNKNOWN))
        if edges and rng.random() < 0.5:
            e = rng.choice(edges)
            out = OutSel(rng.randint(1, max(e.w for e in edges)), (e.u, e.v))
        in_sel = None
        if rng.random() < 0.5:
            in_sel = InSel(rng.randint(1, max((e.w for e in edges), default=1)),
                           _random_label(rng, nodes, max_len, top),
                           _random_label(rng, nodes, max_len, top))
        newd = INF if rng.random() < 1 / (top + 2) else rng.randint(0, top)
        states[v] = NodeState(
            p=rng.choice(choices),
            d=rng.randint(0, top),
            size=SizeInfo(rng.randint(1, top), rng.choice(choices)),
            ell=_random_label(rng, nodes, max_len, top),
            out=out,
            in_sel=in_sel,
            newp=rng.choice(choices),
            newd=newd,
        )
    return Configuration(g, states)


def parent_forest(c: Configuration) -> tuple[list[tuple[int, frozenset[int]]], frozenset[int]]:
    """Split the parent digraph into rooted in-trees and nodes on or under a cycle."""
    status: dict[int, int | None] = {}  # node -> root id, or None for cycle-bound
    for start in c:
        path = []
        on_path = set()
        x = start
        while x not in status:
            if x in on_path:
                break
            path.append(x)
            on_path.add(x)
            p = c[x].p
            if p is None:
                status[x] = x
                path.pop()
                break
            x = p
        if x in status:
            verdict = status[x]
        else:
            verdict = None
        for y in path:
            status[y] = verdict
    roots: dict[int, set[int]] = {}
    cyc = set()
    for v, r in status.items():
        if r is None:
            cyc.add(v)
        else:
            roots.setdefault(r, set()).add(v)
    frags = [(r, frozenset(m)) for r, m in sorted(roots.items())]
    return frags, frozenset(cyc)


def bitlen(x: int) -> int:
    return int(max(x, 1)).bit_length()


def label_bits(ell: Label) -> int:
    return sum(bitlen(a) + bitlen(d) for a, d in ell)


def in_bits(sel: InSel | None) -> int:
    if sel is None:
        return 0
    return bitlen(sel.w) + label_bits(sel.la) + label_bits(sel.lb)


# serialization: one "key=value" line per node

def _fmt_opt(x) -> str:
    if x is None:
        return "-"
    if x == INF:
        return "inf"
    return str(x)


def _fmt_label(ell: Label) -> str:
    return "".join(f"({a}:{d})" for a, d in ell) or "()"


_PAIR = re.compile(r"\((\d+):(\d+)\)")


def _parse_label(text: str) -> Label:
    if text == "()":
        return ()
    pairs = _PAIR.findall(text)
    if "".join(f"({a}:{d})" for a, d in pairs) != text:
        raise ValueError(f"bad label {text!r}")
    return tuple(LabelPair(int(a), int(d)) for a, d in pairs)


def _parse_opt(text: str):
    if text == "-":
        return None
    if text == "inf":
        return INF
    return int(text)


def format_state(v: int, s: NodeState) -> str:
    if s.out is None:
        out = "-"
    elif s.out is UNKNOWN:
        out = "?"
    else:
        out = f"{s.out.w}/{s.out.edge[0]}/{s.out.edge[1]}"
    ins = "-" if s.in_sel is None else f"{s.in_sel.w}/{_fmt_label(s.in_sel.la)}/{_fmt_label(s.in_sel.lb)}"
    return (f"id={v} p={_fmt_opt(s.p)} d={s.d} size={s.size.count}/{_fmt_opt(s.size.heavy)} "
            f"ell={_fmt_label(s.ell)} out={out} in={ins} newp={_fmt_opt(s.newp)} newd={_fmt_opt(s.newd)}")


def parse_state(line: str) -> tuple[int, NodeState]:
    fields = dict(tok.split("=", 1) for tok in line.split())
    missing = {"id", "p", "d", "size", "ell", "out", "in", "newp", "newd"} - set(fields)
    if missing:
        raise ValueError(f"missing fields {sorted(missing)}")
    count, heavy = fields["size"].split("/")
    out = UNKNOWN if fields["out"] == "?" else None
    if fields["out"] not in ("-", "?"):
        w, a, b = fields["out"].split("/")
        out = OutSel(int(w), (int(a), int(b)))
    in_sel = None
    if fields["in"] != "-":
        w, la, lb = fields["in"].split("/")
        in_sel = InSel(int(w), _parse_label(la), _parse_label(lb))
    state = NodeState(
        p=_parse_opt(fields["p"]), d=int(fields["d"]),
        size=SizeInfo(int(count), _parse_opt(heavy)),
        ell=_parse_label(fields["ell"]), out=out, in_sel=in_sel,
        newp=_parse_opt(fields["newp"]), newd=_parse_opt(fields["newd"]),
    )
    return int(fields["id"]), state


def dump_configuration(c: Configuration) -> str:
    return "".join(format_state(v, c[v]) + "\n" for v in c)


def load_configuration(g: Graph, text: str) -> Configuration:
    states = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            v, s = parse_state(line)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        states[v] = s
    return Configuration(g, states)
