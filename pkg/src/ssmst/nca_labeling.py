"""Heavy-path NCA labels: the encoder rules (size and label correction) and the decoder."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .state_model import (NIL, Configuration, Label, LabelPair, NodeState, SizeInfo,
                          root_label)


@dataclass(frozen=True, slots=True)
class LabelingVerdict:
    leaf: bool
    sizec: bool
    label_r: bool
    label_nd: bool
    label_ok: bool
    heavy: bool
    light: bool

    def failing(self) -> list[str]:
        bad = []
        if not self.sizec:
            bad.append("SizeC")
        if not self.label_ok:
            bad.append("Label")
        return bad


def children(c: Configuration, v: int) -> list[int]:
    return c.children(v)


def nbr_nd_s(c: Configuration, v: int) -> SizeInfo:
    kids = c.children(v)
    if not kids:
        raise ValueError(f"node {v} has no children")
    total = 1 + sum(c[u].size.count for u in kids)
    biggest = max(c[u].size.count for u in kids)
    heavy = max(u for u in kids if c[u].size.count == biggest)
    return SizeInfo(total, heavy)


def is_leaf(c: Configuration, v: int) -> bool:
    return not c.children(v) and c[v].size == SizeInfo(1, NIL)


def size_ok(c: Configuration, v: int) -> bool:
    if is_leaf(c, v):
        return True
    return bool(c.children(v)) and c[v].size == nbr_nd_s(c, v)


def _heavy(c: Configuration, v: int) -> bool:
    s = c[v]
    ps = c[s.p]
    if ps.size.heavy != v or not s.size.count < ps.size.count:
        return False
    if not s.ell or not ps.ell or len(s.ell) != len(ps.ell):
        return False
    return s.ell[:-1] == ps.ell[:-1] and s.ell[-1].anchor == ps.ell[-1].anchor \
        and ps.ell[-1].dist + 1 == s.ell[-1].dist


def _light(c: Configuration, v: int) -> bool:
    s = c[v]
    ps = c[s.p]
    return ps.size.heavy != v and 2 * s.size.count <= ps.size.count \
        and s.ell == ps.ell + (LabelPair(v, 0),)


def predicates(c: Configuration, v: int) -> LabelingVerdict:
    s = c[v]
    leaf = is_leaf(c, v)
    sizec = size_ok(c, v)
    label_r = s.p is NIL and s.ell == root_label(v)
    has_parent = s.p is not NIL and s.p in c.graph.adj[v]
    heavy = has_parent and _heavy(c, v)
    light = has_parent and _light(c, v)
    label_nd = has_parent and (heavy or light)
    return LabelingVerdict(leaf, sizec, label_r, label_nd, label_r or label_nd, heavy, light)


def label_ok(c: Configuration, v: int) -> bool:
    s = c[v]
    if s.p is NIL:
        return s.ell == root_label(v)
    return _heavy(c, v) or _light(c, v)


def guard_RSC(c: Configuration, v: int) -> bool:
    return not size_ok(c, v)


def act_RSC(c: Configuration, v: int) -> NodeState:
    if not c.children(v):
        return c[v].but(size=SizeInfo(1, NIL))
    return c[v].but(size=nbr_nd_s(c, v))


def guard_RLC(c: Configuration, v: int) -> bool:
    return size_ok(c, v) and not label_ok(c, v)


def act_RLC(c: Configuration, v: int) -> NodeState:
    s = c[v]
    if s.p is NIL:
        # a root keeps no parent to copy from; reset like the correction rule does
        return s.but(ell=root_label(v))
    ps = c[s.p]
    if ps.size.heavy == v and ps.ell:
        last = ps.ell[-1]
        return s.but(ell=ps.ell[:-1] + (LabelPair(last.anchor, last.dist + 1),))
    return s.but(ell=ps.ell + (LabelPair(v, 0),))


@lru_cache(maxsize=1 << 16)
def nca_decode(lu: Label, lv: Label) -> Label | None:
    """Label of the nearest common ancestor, or None when the labels share no root."""
    k = 0
    while k < len(lu) and k < len(lv) and lu[k] == lv[k]:
        k += 1
    prefix = tuple(lu[:k])
    ru, rv = lu[k:], lv[k:]
    if ru and rv:
        if ru[0].anchor == rv[0].anchor:
            return prefix + (LabelPair(ru[0].anchor, min(ru[0].dist, rv[0].dist)),)
        # branches leave the common prefix on different light edges
        return prefix if prefix else None
    if not ru and not rv:
        return tuple(lu)
    return tuple(lu) if not ru else tuple(lv)


def is_ancestor_label(a: Label | None, ell: Label) -> bool:
    """True when `a` labels an ancestor of (or the same node as) the owner of `ell`."""
    return a is not None and len(a) > 0 and nca_decode(a, ell) == a


def label_order(ell: Label | None) -> tuple:
    """Total order on labels: None lowest, then by length, then pairwise."""
    if ell is None:
        return (-1,)
    return (len(ell), tuple(ell))


# standalone labeling protocol on a fixed parent structure

LABEL_RULES = ("RSC", "RLC")


def labeling_enabled(c: Configuration, v: int) -> str | None:
    if guard_RSC(c, v):
        return "RSC"
    if guard_RLC(c, v):
        return "RLC"
    return None


def labeling_apply(c: Configuration, v: int, rule: str) -> NodeState:
    return act_RSC(c, v) if rule == "RSC" else act_RLC(c, v)


def tree_configuration(g, parent: dict[int, int | None]) -> Configuration:
    """Legitimately labeled configuration for the given parent map (must be a forest)."""
    kids: dict[int, list[int]] = {v: [] for v in g.nodes}
    roots = []
    for v, p in parent.items():
        if p is None:
            roots.append(v)
        else:
            kids[p].append(v)
    order = []
    depth = {}
    for r in sorted(roots):
        depth[r] = 0
        stack = [r]
        while stack:
            x = stack.pop()
            order.append(x)
            for y in kids[x]:
                depth[y] = depth[x] + 1
                stack.append(y)
    if len(order) != len(parent):
        raise ValueError("parent map is not a forest")
    size = {}
    for x in reversed(order):
        if kids[x]:
            total = 1 + sum(size[y].count for y in kids[x])
            big = max(size[y].count for y in kids[x])
            size[x] = SizeInfo(total, max(y for y in kids[x] if size[y].count == big))
        else:
            size[x] = SizeInfo(1, NIL)
    ell = {}
    for x in order:
        p = parent[x]
        if p is None:
            ell[x] = root_label(x)
        elif size[p].heavy == x:
            last = ell[p][-1]
            ell[x] = ell[p][:-1] + (LabelPair(last.anchor, last.dist + 1),)
        else:
            ell[x] = ell[p] + (LabelPair(x, 0),)
    return Configuration(g, {
        v: NodeState(p=parent[v], d=depth[v], size=size[v], ell=ell[v], out=None, in_sel=None,
              newp=parent[v], newd=depth[v])
        for v in g.nodes
    })
