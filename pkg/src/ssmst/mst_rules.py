"""SS-MST guarded rules: correction, labeling, merging and recovering, under a fixed priority."""

from __future__ import annotations

from enum import Enum

from . import nca_labeling as nl
from .state_model import INF, NIL, UNKNOWN, Configuration, InSel, NodeState, OutSel, root_label


class RuleId(str, Enum):
    RCorrect = "RCorrect"
    RSC = "RSC"
    RLC = "RLC"
    RMin = "RMin"
    RMerge = "RMerge"
    RDist = "RDist"
    REnd = "REnd"
    RRec = "RRec"

    def __str__(self):
        return self.value


PRIORITY = tuple(RuleId)


# --- correction -------------------------------------------------------------

def settled(c: Configuration, v: int) -> bool:
    s = c[v]
    return s.p == s.newp and s.d == s.newd


def distance_exact(c: Configuration, v: int) -> bool:
    s = c[v]
    if s.p is NIL:
        return s.d == 0
    return s.d == c[s.p].d + 1


def awaiting_copy(c: Configuration, v: int) -> bool:
    """v keeps its parent through a merge whose copy already reached that parent."""
    s = c[v]
    return s.p is not NIL and s.p == s.newp and settled(c, s.p) and not settled(c, v) \
        and s.newd == c[s.p].newd + 1


def guard_distance(c: Configuration, v: int) -> bool:
    return distance_exact(c, v) or awaiting_copy(c, v)


def rule_RCorrect(c: Configuration, v: int) -> NodeState:
    s = c[v].but(out=UNKNOWN, in_sel=None)
    if s.p is NIL:
        return s.but(d=0)
    dp = c[s.p].d
    if dp + 1 < s.d:
        return s.but(d=dp + 1)
    return s.but(p=NIL, ell=root_label(v), d=0)


def correctF(c: Configuration, v: int) -> bool:
    return guard_distance(c, v) and nl.size_ok(c, v) and nl.label_ok(c, v)


# --- merging ----------------------------------------------------------------

def _canon(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def outgoing_edges(c: Configuration, v: int) -> list[tuple[int, int]]:
    s = c[v]
    kids = set(c.children(v))
    found = []
    for u, w in c.graph.adj[v].items():
        if u == s.p or u in kids:
            continue
        if nl.nca_decode(c[u].ell, s.ell) is None:
            found.append((w, *_canon(u, v)))
    found.sort()
    return [(a, b) for _, a, b in found]


def _local_out(c: Configuration, v: int) -> OutSel | None:
    adj = c.graph.adj[v]
    best = None
    for a, b in outgoing_edges(c, v):
        cand = OutSel(adj[b if a == v else a], (a, b))
        if best is None or cand.key < best.key:
            best = cand
    return best


def cand_l(c: Configuration, v: int) -> int | None:
    lo = _local_out(c, v)
    return None if lo is None else lo.w


def _reported(c: Configuration, u: int) -> bool:
    # a child that still has to relabel may hold a value computed for an older fragment
    return c[u].out is not UNKNOWN and nl.label_ok(c, u)


def cand_c(c: Configuration, v: int) -> int | None:
    ws = [c[u].out.w for u in c.children(v) if isinstance(c[u].out, OutSel)]
    return min(ws) if ws else None


def best_out(c: Configuration, v: int):
    """(Candidate, NCand(Candidate)): the EdgeKey-least outgoing edge of v's subtree.

    UNKNOWN until every child has reported, None when the subtree has no outgoing edge.
    """
    return c.memo(("best_out", v), lambda: _best_out(c, v))


def _best_out(c: Configuration, v: int):
    best = _local_out(c, v)
    for u in c.children(v):
        if not _reported(c, u):
            return UNKNOWN
        o = c[u].out
        if o is not None and (best is None or o.key < best.key):
            best = OutSel(o.w, o.edge)
    return best


def candidate(c: Configuration, v: int) -> int | None:
    b = best_out(c, v)
    return b.w if isinstance(b, OutSel) else None


def rule_RMin(c: Configuration, v: int) -> NodeState:
    return c[v].but(out=best_out(c, v))


def new_parent(c: Configuration, v: int) -> int | None:
    s = c[v]
    if not isinstance(s.out, OutSel):
        return None
    a, b = s.out.edge
    if v in (a, b):
        u = b if a == v else a
        # only cross an edge the other fragment has chosen too
        if (a, b) in outgoing_edges(c, v) and c[u].out == s.out:
            return u
        return None
    kids = [u for u in c.children(v) if c[u].out == s.out]
    return min(kids) if kids else None


def reorientation(c: Configuration, v: int) -> bool:
    s = c[v]
    if s.p is NIL:
        return True
    ps = c[s.p]
    return ps.out == s.out and ps.newp == v


def target_newp(c: Configuration, v: int) -> int | None:
    s = c[v]
    if isinstance(s.out, OutSel) and s.out == best_out(c, v) and reorientation(c, v):
        np = new_parent(c, v)
        if np is not None:
            return np
    return s.p


def change_newp(c: Configuration, v: int) -> bool:
    return c[v].newp != target_newp(c, v)


def rule_RMerge(c: Configuration, v: int) -> NodeState:
    return c[v].but(newp=target_newp(c, v), newd=INF)


def new_dist(c: Configuration, v: int):
    """Future distance, or None while the future parent has none yet."""
    s = c[v]
    q = s.newp
    if q is NIL:
        return 0
    qs = c[q]
    if qs.newp == v:
        if q == s.p or q in c.children(v):
            return None  # a reorientation inside the fragment, still waiting for its merge edge
        return 0 if q > v else 1
    if qs.newd == INF:
        return None
    return qs.newd + 1


def change_newd(c: Configuration, v: int) -> bool:
    nd = new_dist(c, v)
    return nd is not None and c[v].newd != nd


def rule_RDist(c: Configuration, v: int) -> NodeState:
    return c[v].but(newd=new_dist(c, v))


def copy_ready(c: Configuration, v: int) -> bool:
    """Registers newp/newd are final for v and its future parent has already copied."""
    s = c[v]
    if settled(c, v) or s.newd == INF or new_dist(c, v) != s.newd:
        return False
    if s.newd != 0 and (s.newp is NIL or not settled(c, s.newp)):
        return False
    # children staying below v must know their new distance before v's old one disappears
    return all(c[u].newd == s.newd + 1 for u in c.children(v) if c[u].newp == v)


def rule_REnd(c: Configuration, v: int) -> NodeState:
    s = c[v]
    if s.newd == 0:
        return s.but(p=NIL, d=0, newp=NIL, out=UNKNOWN)
    return s.but(p=s.newp, d=s.newd, out=UNKNOWN)


# --- recovering -------------------------------------------------------------

def _rec_nca(e: InSel | None):
    return None if e is None else nl.nca_decode(e.la, e.lb)


def _rank(e: InSel) -> tuple:
    lo, hi = sorted((e.la, e.lb), key=nl.label_order)
    return (nl.label_order(_rec_nca(e)), e.w, nl.label_order(lo), nl.label_order(hi))


def _record(w: int, la, lb) -> InSel:
    lo, hi = sorted((tuple(la), tuple(lb)), key=nl.label_order)
    return InSel(w, lo, hi)


def ie_local(c: Configuration, v: int) -> list[InSel]:
    """Per common ancestor, the lightest non-tree edge at v inside v's fragment."""
    return c.memo(("ie_local", v), lambda: _ie_local(c, v))


def _ie_local(c: Configuration, v: int) -> list[InSel]:
    s = c[v]
    kids = set(c.children(v))
    best: dict[tuple, InSel] = {}
    for u, w in c.graph.adj[v].items():
        if u == s.p or u in kids:
            continue
        ca = nl.nca_decode(c[u].ell, s.ell)
        if ca is None:
            continue
        rec = _record(w, c[u].ell, s.ell)
        k = nl.label_order(ca)
        if k not in best or _rank(rec) < _rank(best[k]):
            best[k] = rec
    return list(best.values())


def ie_children(c: Configuration, v: int) -> list[InSel]:
    ell = c[v].ell
    out = []
    for u in c.children(v):
        e = c[u].in_sel
        if e is not None and nl.is_ancestor_label(_rec_nca(e), ell):
            out.append(e)
    return out


def min_ie(c: Configuration, v: int, after) -> InSel | None:
    floor = nl.label_order(after)
    pool = [e for e in ie_local(c, v) + ie_children(c, v)
            if nl.label_order(_rec_nca(e)) > floor]
    return min(pool, key=_rank) if pool else None


def internal_edge_macros(c: Configuration, v: int) -> InSel | None:
    """IE(v): the next record of the cyclic sweep over common ancestors."""
    cur = c[v].in_sel
    nxt = min_ie(c, v, _rec_nca(cur)) if cur is not None else None
    return nxt if nxt is not None else min_ie(c, v, None)


def select_edge(c: Configuration, v: int) -> bool:
    s = c[v]
    e = s.in_sel
    ca = _rec_nca(e)
    if e is None or not nl.is_ancestor_label(ca, s.ell):
        return True  # nothing meaningful held: free to pick
    at_nca = ca == s.ell
    pe = None if s.p is NIL else c[s.p].in_sel
    end_forward = (s.p is NIL or at_nca) and e in ie_local(c, v)
    forwarded = at_nca or pe == e
    better_p = (s.p is not NIL and not at_nca and pe is not None
                and _rec_nca(pe) == ca and _rank(pe) < _rank(e))
    return end_forward or forwarded or better_p


def recover(c: Configuration, v: int) -> bool:
    s = c[v]
    if not settled(c, v):
        return False
    if s.p is NIL:
        if s.d != 0:
            return False
    elif s.newd != c[s.p].newd + 1:
        return False
    return best_out(c, v) is None and select_edge(c, v)


def rule_RRec(c: Configuration, v: int) -> NodeState:
    s = c[v]
    e = internal_edge_macros(c, v)
    s = s.but(in_sel=e)
    if e is not None and s.p is not NIL and _rec_nca(e) != s.ell \
            and c.graph.weight(v, s.p) > e.w:
        # the detached node is a settled root, so no stale merge can re-attach it
        return s.but(p=NIL, d=0, ell=root_label(v), newp=NIL, newd=0, out=UNKNOWN)
    return s


# --- composition ------------------------------------------------------------

def node_rule(c: Configuration, v: int) -> RuleId | None:
    """Highest-priority enabled rule at v, or None."""
    if not guard_distance(c, v):
        return RuleId.RCorrect
    # a node whose merge copy is due is frozen for every rule but REnd
    ready = copy_ready(c, v)
    if not ready:
        if not nl.size_ok(c, v):
            return RuleId.RSC
        if not nl.label_ok(c, v):
            return RuleId.RLC
        # CorrectF holds from here on
        if c[v].out != best_out(c, v):
            return RuleId.RMin
        if change_newp(c, v):
            return RuleId.RMerge
        if change_newd(c, v):
            return RuleId.RDist
        if recover(c, v):
            return RuleId.RRec
        return None
    return RuleId.REnd


def enabled(c: Configuration, nodes=None) -> dict[int, RuleId]:
    found = {}
    for v in (c if nodes is None else nodes):
        r = node_rule(c, v)
        if r is not None:
            found[v] = r
    return found


def rule_RSC(c: Configuration, v: int) -> NodeState:
    # the subtree changed, so its minimum outgoing edge must be gathered again
    return nl.act_RSC(c, v).but(out=UNKNOWN)


def rule_RLC(c: Configuration, v: int) -> NodeState:
    return nl.act_RLC(c, v).but(out=UNKNOWN)


ACTIONS = {
    RuleId.RCorrect: rule_RCorrect,
    RuleId.RSC: rule_RSC,
    RuleId.RLC: rule_RLC,
    RuleId.RMin: rule_RMin,
    RuleId.RMerge: rule_RMerge,
    RuleId.RDist: rule_RDist,
    RuleId.REnd: rule_REnd,
    RuleId.RRec: rule_RRec,
}


def apply_rule(c: Configuration, v: int, rule: RuleId) -> NodeState:
    return ACTIONS[rule](c, v)
