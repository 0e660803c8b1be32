import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import tree_graph
from ssmst import daemon_engine as de
from ssmst import mst_rules as mr
from ssmst import nca_labeling as nl
from ssmst import verification_oracles as vo
from ssmst.graph_core import Edge, Graph, generate_graph, kruskal_mst
from ssmst.state_model import LabelPair, arbitrary_configuration, singleton_configuration

R = mr.RuleId


def pair():
    return singleton_configuration(Graph.build([0, 1], [Edge(0, 1, 4)]))


def test_synchronous_step_fires_everyone():
    c, rec = de.step(pair(), de.Synchronous())
    assert rec.fired == ((0, R.RMin), (1, R.RMin))
    assert rec.closes_round and rec.round == 0


def test_round_robin_fires_one_node_per_step():
    pol = de.RoundRobin()
    c, rec = de.step(pair(), pol)
    assert rec.fired == ((0, R.RMin),) and not rec.closes_round
    c, rec = de.step(c, pol)
    assert rec.fired == ((1, R.RMin),) and rec.closes_round


def test_round_closes_when_pending_node_is_disabled():
    parent = {0: None, 1: 0, 2: 1}
    c = nl.tree_configuration(tree_graph(parent), parent)
    c = c.updated({1: c[1].but(ell=(LabelPair(0, 5),))})
    eng = de.Engine(c, de.RoundRobin(), de.Labeling)
    assert eng.enabled == {1: "RLC", 2: "RLC"}
    rec, _ = eng.step()
    # relabeling node 1 makes node 2 consistent again, so the round ends without it
    assert rec.fired == ((1, "RLC"),) and rec.closes_round
    assert eng.enabled == {} and de.round_boundary([rec]) == 1


def test_random_fair_forces_starving_nodes():
    pol = de.RandomFair(0, bound=3)
    picks = [pol.select({0: R.RRec, 1: R.RRec, 2: R.RRec, 3: R.RRec}) for _ in range(40)]
    gaps = {}
    last = {}
    for i, (v,) in enumerate(picks):
        gaps[v] = max(gaps.get(v, 0), i - last.get(v, -1))
        last[v] = i
    assert set(last) == {0, 1, 2, 3}
    # k always-enabled nodes with bound b: nobody waits more than b + k - 1 steps
    assert max(gaps.values()) <= 3 + 4 - 1


def test_make_policy():
    assert de.make_policy("sync").name == "sync"
    assert de.make_policy("rr").name == "rr"
    assert de.make_policy("random:7").name == "random:7"
    with pytest.raises(ValueError):
        de.make_policy("lifo")


def test_singleton_path_converges():
    g = generate_graph(3, "path", (1, 9), 2)
    res = de.run(singleton_configuration(g), de.Synchronous(), 200)
    assert res.stabilized and vo.check_mst(res.final).ok
    assert res.rounds_elapsed == 22  # frozen from a run; the last 2n = 6 rounds are the quiet window
    assert de.round_boundary(res.trace) == res.rounds_elapsed


def test_arbitrary_cycle_graph_converges_to_kruskal():
    g = generate_graph(4, "cycle", (1, 20), 5)
    res = de.run(arbitrary_configuration(g, 5), de.RoundRobin(), 2000)
    assert res.stabilized
    assert vo.check_mst(res.final).weight == kruskal_mst(g)[1]


def test_round_limit_reports_failure():
    g = generate_graph(5, "complete", (1, 100), 0)
    res = de.run(singleton_configuration(g), de.Synchronous(), 1)
    assert not res.stabilized and res.rounds_elapsed == 1
    with pytest.raises(ValueError):
        de.run(singleton_configuration(g), de.Synchronous(), 0)


def test_runs_are_deterministic():
    g = generate_graph(10, "random", (1, 30), 3, 0.4)
    a = de.run(arbitrary_configuration(g, 1), de.make_policy("random:4", g.n), 5000)
    b = de.run(arbitrary_configuration(g, 1), de.make_policy("random:4", g.n), 5000)
    assert a.trace == b.trace and a.final == b.final


def test_closure_on_legitimate_tree():
    g = generate_graph(9, "random", (1, 30), 8, 0.5)
    c = vo.mst_configuration(g)
    for pol in (de.Synchronous(), de.RoundRobin(), de.RandomFair(1, g.n)):
        moved = []
        res = de.run(c, pol, 5 * g.n, confirm_window=10 * g.n,
                     on_step=lambda b, rec, a: moved.extend(
                         v for v in a if (a[v].p, a[v].d, a[v].ell) != (b[v].p, b[v].d, b[v].ell)))
        assert not moved and res.rounds_elapsed == 5 * g.n
        assert vo.check_mst(res.final).ok


def test_trace_file(tmp_path):
    g = generate_graph(5, "random", (1, 30), 1, 0.6)
    path = tmp_path / "t.jsonl"
    res = de.run(arbitrary_configuration(g, 2), de.Synchronous(), 1000, trace_path=str(path))
    rows = [json.loads(x) for x in path.read_text().splitlines()]
    assert len(rows) == res.rounds_elapsed
    assert set(rows[0]) == {"round", "fired", "phi", "lambda", "fragments", "mst_gap"}
    assert [r["round"] for r in rows] == list(range(1, len(rows) + 1))
    assert rows[-1]["mst_gap"] == 0 and rows[-1]["fragments"] == 1


def test_labeling_protocol_is_silent_when_legitimate():
    parent = {0: None, 1: 0, 2: 0}
    c = nl.tree_configuration(tree_graph(parent), parent)
    res = de.run(c, de.Synchronous(), 5, protocol=de.Labeling)
    assert res.stabilized and res.rounds_elapsed == 0 and res.moves == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 14), st.sampled_from(["sync", "rr", "random:3"]), st.integers(0, 2**32))
def test_incremental_enabled_map_matches_full_scan(n, daemon, seed):
    g = generate_graph(n, "random", (1, 3 * n), seed, 0.4)
    eng = de.Engine(arbitrary_configuration(g, seed), de.make_policy(daemon, n))
    for _ in range(40 * n):
        eng.step()
        assert eng.enabled == mr.enabled(eng.c)


@pytest.mark.parametrize("daemon,bound", [("sync", lambda n: 0), ("rr", lambda n: n - 1),
                                          ("random:5", lambda n: 2 * n - 1)])
def test_fairness_audit(daemon, bound):
    g = generate_graph(12, "random", (1, 40), 6, 0.4)
    eng = de.Engine(arbitrary_configuration(g, 6), de.make_policy(daemon, g.n))
    streak = {}
    worst = 0
    for _ in range(3000):
        waiting = set(eng.enabled)
        rec, _ = eng.step()
        fired = {v for v, _ in rec.fired}
        streak = {v: streak.get(v, 0) + 1 for v in waiting - fired if v in eng.enabled}
        worst = max([worst, *streak.values()])
    assert worst <= bound(g.n)
