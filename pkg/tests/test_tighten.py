from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from otsbm.bench import brute_force_ots, topology_costs
from otsbm.metrics import delta_m
from otsbm.model import generate_instances, physical_bounds, synthetic_network
from otsbm.optcore import solve_lp, solve_milp
from otsbm.otsbuild import build_dcopf, build_ots_milp
from otsbm.tighten import (CAP_PAD, TighteningConfig, TighteningError, heuristic_cost_bound, initial_bounds,
                           run_algorithm1, update_bigms_bm, update_capacities_bl)

from suite import all_closed_feasible


def approx_pair(pair, abs=1e-7):
    return pytest.approx(pair, abs=abs)


# -- heuristic cost bound ----------------------------------------------------

def test_heuristic_tri3(tri3):
    cost, topo = heuristic_cost_bound(tri3)
    assert cost == pytest.approx(600.0, abs=1e-7) and topo == {"L3": 1}


def test_heuristic_relieves_congestion(ring4):
    # enumeration: all closed 1080, only L5 open 1000, L4 open 600 (with or without L5)
    costs = topology_costs(ring4)
    assert costs[(0, 0)] == pytest.approx(1080.0, abs=1e-7)
    assert costs[(0, 1)] == pytest.approx(1000.0, abs=1e-7)
    assert costs[(1, 0)] == pytest.approx(600.0, abs=1e-7)
    cost, topo = heuristic_cost_bound(ring4)
    assert cost < costs[(0, 0)] - 1.0
    assert cost == pytest.approx(brute_force_ots(ring4, costs)[0], abs=1e-7)
    assert topo == {"L4": 0, "L5": 1}


def test_heuristic_zero_demand(tri3):
    cost, topo = heuristic_cost_bound(tri3.with_demands({2: 0.0}))
    assert cost == pytest.approx(0.0, abs=1e-9) and topo == {"L3": 1}


def test_heuristic_needs_feasible_start(tri3):
    # 130 MW at bus 2 exceeds what L1 and L2 can deliver
    with pytest.raises(TighteningError):
        heuristic_cost_bound(tri3.with_demands({2: 130.0}))


# -- single passes ------------------------------------------------------------

def test_bm_pass_tri3(tri3):
    b = update_bigms_bm(tri3, initial_bounds(tri3), 3000.0)
    assert b.bigms["L3"] == approx_pair((40.0, 40.0))
    again = update_bigms_bm(tri3, b, 3000.0)
    assert again.bigms["L3"] == approx_pair((40.0, 40.0))
    assert not b.pinned_closed


def test_bm_pass_pins_at_optimum(tri3):
    b = update_bigms_bm(tri3, initial_bounds(tri3), 600.0)
    assert b.bigms["L3"] == (100.0, 100.0)
    assert b.pinned_closed == {"L3"}
    # a pinned line is skipped on the next pass
    assert update_bigms_bm(tri3, b, 3000.0).bigms["L3"] == (100.0, 100.0)


def test_bl_pass_tri3(tri3):
    b = update_capacities_bl(tri3, initial_bounds(tri3), 3000.0)
    assert b.capacities["L2"] == approx_pair((-10.0, 50.0))
    # bus 2 balance gives f_L1 = 60 + f_L2 >= 10, so flow 2->1 is at most -10
    assert b.capacities["L1"] == approx_pair((50.0, -10.0))
    # with L3 closed: f_L3 = 2 f_L1 - 60, and p1, p3 >= 0 keep f_L1 in [20, 40]
    assert b.capacities["L3"] == approx_pair((20.0, 20.0))
    assert b.capacities["L3"][0] <= 40.0


def test_bl_pass_zero_demand(tri3):
    net = tri3.with_demands({2: 0.0})
    for cap in (0.0, 3000.0):
        b = update_capacities_bl(net, initial_bounds(net), cap)
        assert b.capacities["L3"] == approx_pair((0.0, 0.0), abs=1e-9)
        # with x_L3 relaxed a loop flow t survives: 3t <= 100 (1 - x) and t <= 40 x peak at x = 5/11
        assert b.capacities["L1"] == approx_pair((200 / 11, 200 / 11))
        assert b.capacities["L2"] == approx_pair((200 / 11, 200 / 11))


def parallel_pair():
    # two identical parallel lines share 50 MW equally, so closing the 10 MW switchable one is infeasible
    from otsbm.model import Bus, Generator, Line, Network
    return Network("pair", (Bus(1, 0.0), Bus(2, 50.0)), (Generator(1, 10.0, 0.0, 100.0),),
                   (Line("L1", 1, 2, 100.0, 100.0, False), Line("L2", 1, 2, 100.0, 10.0, True)), 1)


def test_bl_pass_pins_open():
    net = parallel_pair()
    b = update_capacities_bl(net, initial_bounds(net), 500.0 * (1 + CAP_PAD))
    assert b.pinned_open == {"L2"}
    assert b.capacities["L2"] == (10.0, 10.0)
    # L1 goes first with x_L2 relaxed: f_L1 = 50 + 10x needs x <= 5/12, f_L1 = 50 - 10x needs x <= 5/8
    assert b.capacities["L1"] == approx_pair((325 / 6, -175 / 4))
    out = solve_milp(build_ots_milp(net, b))
    assert out.objective == pytest.approx(500.0, abs=1e-7) and out.values["x[L2]"] == 0.0


def test_bl_infeasible_fixed_line_raises(tri3):
    with pytest.raises(TighteningError):
        update_capacities_bl(tri3, initial_bounds(tri3), 100.0)


def test_update_order_filters_and_sequences(tri3):
    b0 = initial_bounds(tri3)
    only_l2 = update_capacities_bl(tri3, b0, 3000.0, order=["L2", "nope"])
    assert only_l2.capacities["L1"] == (50.0, 50.0)
    assert only_l2.capacities["L2"] == approx_pair((-10.0, 50.0))


# -- full runs ----------------------------------------------------------------

def test_sp_oc_is_initialization_only(tri3):
    for cb in ("naive", "heuristic"):
        rep = run_algorithm1(tri3, TighteningConfig("SP", "OC", cb, 4))
        assert rep.bounds.bigms == {"L3": (100.0, 100.0)}
        assert rep.bounds.capacities == physical_bounds(tri3).capacities
        assert rep.t_bnd_s == 0.0 and rep.lp_count == 0
        assert rep.bounds.method_label == "SP-OC" and rep.bounds.iterations == 0
        assert delta_m(rep.bounds, initial_bounds(tri3))[0] == {"L3": 100.0}


def test_bt_rc_naive_one_pass(tri3):
    rep = run_algorithm1(tri3, TighteningConfig("BT", "RC", "naive", 1))
    assert rep.cost_cap == 3000.0
    assert rep.cost_cap_used == 3000.0 * (1 + CAP_PAD)
    assert rep.bounds.bigms["L3"] == approx_pair((40.0, 40.0))
    assert rep.bounds.capacities["L2"] == approx_pair((-10.0, 50.0))
    assert rep.bounds.method_label == "BT-RC-N(1)"
    assert rep.lp_count == 2 + 6 and rep.t_bnd_s > 0


def test_sp_rc_naive_one_pass(tri3):
    # BL first: L1 (50, -10), L2 (-10, 50); shortest paths then cost 0.5 rad each way
    rep = run_algorithm1(tri3, TighteningConfig("SP", "RC", "naive", 1))
    assert rep.bounds.bigms["L3"] == approx_pair((50.0, 50.0))


def test_bt_rc_heuristic_pins(tri3):
    rep = run_algorithm1(tri3, TighteningConfig("BT", "RC", "heuristic", 1))
    assert rep.cost_cap == pytest.approx(600.0, abs=1e-7)
    assert rep.pinned_closed == {"L3"}
    assert rep.heuristic_topology == {"L3": 1}
    m = build_ots_milp(tri3, rep.bounds)
    assert m.variables[m.index("x[L3]")].lower == 1.0
    out = solve_milp(m)
    assert out.objective == pytest.approx(600.0, abs=1e-7) and out.node_count == 1


@pytest.mark.parametrize("label, expect", [
    ("BT-RC-H(4)", ("BT", "RC", "heuristic", 4, "BT-RC-H(4)")),
    ("sp-rc-n", ("SP", "RC", "naive", 3, "SP-RC-N(3)")),
    ("bt-oc", ("BT", "OC", "heuristic", 3, "BT-OC-H(3)")),
    ("SP-OC", ("SP", "OC", "heuristic", 3, "SP-OC")),
    ("none", ("SP", "OC", "naive", 0, "NONE")),
])
def test_labels(label, expect):
    cfg = TighteningConfig.from_label(label, 3)
    assert (cfg.bigm_rule, cfg.capacity_rule, cfg.cost_bound, cfg.iterations, cfg.label) == expect


@pytest.mark.parametrize("kwargs", [dict(bigm_rule="XX"), dict(capacity_rule="YY"), dict(cost_bound="z"),
                                    dict(iterations=-1)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        TighteningConfig(**kwargs)


def test_bad_label():
    with pytest.raises(ValueError):
        TighteningConfig.from_label("BT-XX")


# -- properties ---------------------------------------------------------------

@st.composite
def instances(draw):
    seed = draw(st.integers(0, 10**6))
    n = draw(st.integers(4, 8))
    net = generate_instances(synthetic_network(seed, n, n - 1 + draw(st.integers(1, 4))), seed, 1)[0]
    if not all_closed_feasible(net):
        net = net.with_demands({b.id: 0.5 * b.demand_mw for b in net.buses})
    return net


@settings(max_examples=15, deadline=None)
@given(instances(), st.sampled_from(["SP-RC", "BT-OC", "BT-RC"]), st.sampled_from(["N", "H"]))
def test_snapshots_nonincreasing_and_optimum_kept(net, method, cb):
    if not all_closed_feasible(net):
        return
    rep = run_algorithm1(net, TighteningConfig.from_label(f"{method}-{cb}", 3))
    for (m0, l0), (m1, l1) in zip(rep.snapshots, rep.snapshots[1:]):
        assert m1 <= m0 + 1e-9 and l1 <= l0 + 1e-9
    opt, _ = brute_force_ots(net)
    out = solve_milp(build_ots_milp(net, rep.bounds), rel_gap=1e-9)
    assert out.objective == pytest.approx(opt, rel=1e-6)


@settings(max_examples=15, deadline=None)
@given(instances())
def test_heuristic_between_naive_and_optimum(net):
    from otsbm.otsbuild import naive_cost_bound
    if not all_closed_feasible(net):
        return
    heur, topo = heuristic_cost_bound(net)
    assert naive_cost_bound(net) >= heur - 1e-9
    assert heur >= brute_force_ots(net)[0] - 1e-9
    assert solve_lp(build_dcopf(net, topo)).objective == pytest.approx(heur, abs=1e-9)
