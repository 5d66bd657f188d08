import itertools
import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from otsbm.graph import (DirectedCostGraph, DisconnectedNetworkError, UnionFind, is_connected_spanning, kruskal,
                         shortest_path_cost, sp_bigm)
from otsbm.model import Bus, Line, Network, physical_bounds


def test_tri3_connectivity(tri3):
    assert is_connected_spanning(tri3)
    assert not is_connected_spanning(tri3.with_switchable(["L2", "L3"]))


def test_single_bus_is_connected():
    assert is_connected_spanning(Network("one", (Bus(1, 0.0),), (), (), 1))


def test_tri3_paths(tri3):
    g = DirectedCostGraph.from_network(tri3, physical_bounds(tri3))
    assert shortest_path_cost(g, 1, 3) == 1.0
    assert shortest_path_cost(g, 3, 1) == 1.0
    assert shortest_path_cost(g, 2, 2) == 0.0


def test_unreachable_is_inf(tri3):
    net = tri3.with_switchable(["L2", "L3"])
    g = DirectedCostGraph.from_network(net, physical_bounds(net))
    assert shortest_path_cost(g, 1, 3) == math.inf
    with pytest.raises(DisconnectedNetworkError):
        sp_bigm(net, physical_bounds(net))


def test_sp_bigm_tri3(tri3):
    b = physical_bounds(tri3)
    assert sp_bigm(tri3, b).bigms["L3"] == (100.0, 100.0)
    assert sp_bigm(tri3, b.with_capacity("L1", 30.0, 30.0)).bigms["L3"] == pytest.approx((80.0, 80.0), abs=1e-12)
    # arc 2->3 has f_pos = -10, clamped to zero cost
    out = sp_bigm(tri3, b.with_capacity("L2", -10.0, 50.0))
    assert out.bigms["L3"][0] == pytest.approx(50.0, abs=1e-12)
    assert out.capacities == b.with_capacity("L2", -10.0, 50.0).capacities


def test_kruskal_ties_by_id():
    # all weights equal: edges are taken in id order
    edges = [(0.5, "c", 1, 2), (0.5, "a", 2, 3), (0.5, "b", 1, 3)]
    assert kruskal([1, 2, 3], edges) == {"a", "b"}


def test_union_find():
    uf = UnionFind(range(5))
    assert uf.union(0, 1) and uf.union(3, 4) and not uf.union(1, 0)
    assert uf.find(0) == uf.find(1) != uf.find(3)


# ---------------------------------------------------------------------------
# random small graphs


@st.composite
def small_networks(draw, max_buses=7):
    n = draw(st.integers(2, max_buses))
    # a random tree keeps the non-switchable subgraph connected
    tree = [(draw(st.integers(1, k)), k + 1) for k in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(1, n), st.integers(1, n)).filter(lambda p: p[0] != p[1]),
                          max_size=6))
    lines = []
    for k, (a, c) in enumerate(tree + extra):
        lines.append(Line(f"L{k + 1}", a, c, draw(st.sampled_from([50.0, 80.0, 100.0, 125.0, 200.0])),
                          draw(st.sampled_from([10.0, 20.0, 35.0, 50.0, 75.0])), switchable=k >= n - 1))
    return Network("rand", tuple(Bus(i, 0.0) for i in range(1, n + 1)), (), tuple(lines), 1)


def enumerate_paths(g: DirectedCostGraph, s: int, t: int) -> float:
    best = math.inf

    def walk(u, seen, cost):
        nonlocal best
        if u == t:
            best = min(best, cost)
            return
        for v, c, _ in g.arcs.get(u, ()):
            if v not in seen:
                walk(v, seen | {v}, cost + c)

    walk(s, {s}, 0.0)
    return 0.0 if s == t else best


@settings(max_examples=60, deadline=None)
@given(small_networks(), st.data())
def test_dijkstra_matches_path_enumeration(net, data):
    b = physical_bounds(net)
    for line in net.lines:
        if not line.switchable and data.draw(st.booleans()):
            b = b.with_capacity(line.id, data.draw(st.floats(-20, 60)), data.draw(st.floats(-20, 60)))
    g = DirectedCostGraph.from_network(net, b)
    for s, t in itertools.product(net.bus_ids, repeat=2):
        assert shortest_path_cost(g, s, t) == enumerate_paths(g, s, t)


@settings(max_examples=60, deadline=None)
@given(small_networks(), st.data())
def test_sp_bigm_monotone_under_capacity_cuts(net, data):
    assume(net.switchable_ids)
    b0 = physical_bounds(net)
    cut = b0
    for line in net.lines:
        if data.draw(st.booleans()):
            fp, fn = cut.capacities[line.id]
            cut = cut.with_capacity(line.id, fp - data.draw(st.floats(0, 80)), fn - data.draw(st.floats(0, 80)))
    before, after = sp_bigm(net, b0), sp_bigm(net, cut)
    for lid in net.switchable_ids:
        assert after.bigms[lid][0] <= before.bigms[lid][0] + 1e-9
        assert after.bigms[lid][1] <= before.bigms[lid][1] + 1e-9


@settings(max_examples=60, deadline=None)
@given(small_networks())
def test_symmetric_capacities_give_symmetric_bigms(net):
    out = sp_bigm(net, physical_bounds(net))
    for lid in net.switchable_ids:
        m_pos, m_neg = out.bigms[lid]
        assert m_pos == pytest.approx(m_neg, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_networks())
def test_triangle_inequality(net):
    g = DirectedCostGraph.from_network(net, physical_bounds(net))
    d = {(s, t): shortest_path_cost(g, s, t) for s, t in itertools.product(net.bus_ids, repeat=2)}
    for n, m, k in itertools.product(net.bus_ids, repeat=3):
        assert d[n, m] <= d[n, k] + d[k, m] + 1e-12


@settings(max_examples=60, deadline=None)
@given(small_networks(max_buses=6), st.randoms(use_true_random=False))
def test_kruskal_is_minimum(net, rnd):
    edges = [(rnd.random(), line.id, line.from_bus, line.to_bus) for line in net.lines]
    tree = kruskal(net.bus_ids, edges)
    weight = {e[1]: e[0] for e in edges}
    assert len(tree) == len(net.buses) - 1
    best = math.inf
    for subset in itertools.combinations(edges, len(net.buses) - 1):
        uf = UnionFind(net.bus_ids)
        if all(uf.union(u, v) for _, _, u, v in subset):
            best = min(best, sum(w for w, *_ in subset))
    assert sum(weight[e] for e in tree) == pytest.approx(best, abs=1e-12)
