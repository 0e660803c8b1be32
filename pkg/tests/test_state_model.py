import math

import pytest
from hypothesis import given, settings, strategies as st

from ssmst.graph_core import generate_graph
from ssmst.state_model import (INF, NIL, UNKNOWN, Configuration, LabelPair, NodeState, SizeInfo,
                               arbitrary_configuration, bitlen, dump_configuration, in_bits,
                               label_bits, load_configuration, parent_forest, parse_state,
                               singleton_configuration)


def test_singleton_configuration():
    g = generate_graph(4, "path", (1, 5), 0)
    c = singleton_configuration(g)
    for v in c:
        s = c[v]
        assert (s.p, s.d, s.size, s.ell, s.newp, s.newd) == (NIL, 0, SizeInfo(1, NIL), ((v, 0),), NIL, 0)


def test_configuration_must_cover_graph():
    g = generate_graph(3, "path", (1, 5), 0)
    c = singleton_configuration(g)
    with pytest.raises(ValueError):
        Configuration(g, {0: c[0]})


def test_updated_leaves_original_untouched():
    g = generate_graph(3, "path", (1, 5), 0)
    c = singleton_configuration(g)
    c2 = c.updated({1: c[1].but(p=0, d=1)})
    assert c[1].p is NIL and c2[1].p == 0
    assert c2.children(0) == [1] and c.children(0) == []


def test_arbitrary_configuration_is_seeded():
    g = generate_graph(10, "random", (1, 20), 3, 0.4)
    assert arbitrary_configuration(g, 5) == arbitrary_configuration(g, 5)
    assert arbitrary_configuration(g, 5) != arbitrary_configuration(g, 6)


def test_arbitrary_domains_over_many_seeds():
    g = generate_graph(9, "random", (1, 20), 1, 0.4)
    top = 2 * g.n
    max_len = math.ceil(math.log2(g.n)) + 2
    wmax = max(e.w for e in g.edges)
    saw_inf = saw_unknown = False
    for seed in range(10_000):
        c = arbitrary_configuration(g, seed)
        for v in c:
            s = c[v]
            assert s.p is NIL or s.p in g.adj[v]
            assert s.newp is NIL or s.newp in g.adj[v]
            assert 0 <= s.d <= top
            assert s.newd == INF or 0 <= s.newd <= top
            assert 1 <= s.size.count <= top
            assert s.size.heavy is NIL or s.size.heavy in g.adj[v]
            assert len(s.ell) <= max_len
            assert s.out in (None, UNKNOWN) or 1 <= s.out.w <= wmax
            saw_inf |= s.newd == INF
            saw_unknown |= s.out is UNKNOWN
    assert saw_inf and saw_unknown


def test_state_line_format():
    s = NodeState(p=3, d=2, size=SizeInfo(4, 7), ell=(LabelPair(0, 0), LabelPair(3, 1)),
                  out=UNKNOWN, in_sel=None, newp=NIL, newd=INF)
    v, back = parse_state("id=5 p=3 d=2 size=4/7 ell=(0:0)(3:1) out=? in=- newp=- newd=inf")
    assert v == 5 and back == s


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32))
def test_dump_load_round_trip(n, seed):
    g = generate_graph(n, "random", (1, 30), seed, 0.5)
    c = arbitrary_configuration(g, seed)
    assert load_configuration(g, "# header\n\n" + dump_configuration(c)) == c


def test_load_reports_bad_line():
    g = generate_graph(2, "path", (1, 5), 0)
    with pytest.raises(ValueError, match="line 2"):
        load_configuration(g, dump_configuration(singleton_configuration(g)).replace("ell=(1:0)", "ell=(1:"))


def test_parent_forest_splits_cycles():
    g = generate_graph(5, "complete", (1, 5), 0)
    c = singleton_configuration(g)
    c = c.updated({0: c[0].but(p=1), 1: c[1].but(p=0), 2: c[2].but(p=1), 4: c[4].but(p=3)})
    frags, cyc = parent_forest(c)
    assert frags == [(3, frozenset({3, 4}))]
    assert cyc == frozenset({0, 1, 2})


def test_bit_counts():
    assert bitlen(0) == 1 and bitlen(8) == 4
    assert label_bits(((5, 3),)) == 3 + 2
    assert in_bits(None) == 0
