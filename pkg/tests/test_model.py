import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from otsbm.model import (BoundsState, InstanceError, RNG_NAME, generate_instances, parse_network, physical_bounds,
                         read_bounds, render_network, synthetic_network, validate_network, write_bounds)


def _doc(net):
    return json.loads(render_network(net))


def _edit(net, fn):
    doc = _doc(net)
    fn(doc)
    return json.dumps(doc)


def test_tri3_reads_back(tri3):
    assert [b.id for b in tri3.buses] == [1, 2, 3]
    assert len(tri3.generators) == 2 and len(tri3.lines) == 3
    assert tri3.slack_bus == 1
    assert tri3.switchable_ids == ["L3"]
    assert tri3.line("L3").b == 100.0


def test_missing_generator_is_zero_unit(tri3):
    g = tri3.generator_at(2)
    assert (g.pmin_mw, g.pmax_mw, g.cost_per_mwh) == (0.0, 0.0, 0.0)


def test_slack_defaults_to_lowest_bus(tri3):
    def drop(doc):
        del doc["slack_bus"]
        doc["buses"].reverse()
    assert parse_network(_edit(tri3, drop)).slack_bus == 1


@pytest.mark.parametrize("mutate, path, message", [
    (lambda d: d["lines"][0].update({"to": 1}), "lines[0]", "self-loop line"),
    (lambda d: d["lines"][1].update({"id": "L1"}), "lines[1].id", "duplicate line id"),
    (lambda d: d["buses"][1].update({"id": 1}), "buses[1].id", "duplicate bus id"),
    (lambda d: d["lines"][2].update({"to": 9}), "lines[2].to", "unknown bus 9"),
    (lambda d: d["generators"][0].update({"bus": 7}), "generators[0].bus", "unknown bus 7"),
    (lambda d: d["lines"][0].update({"susceptance_mw_per_rad": 0}), "lines[0].susceptance_mw_per_rad", "positive"),
    (lambda d: d["lines"][1].update({"capacity_mw": -5}), "lines[1].capacity_mw", "positive"),
    (lambda d: d["generators"][1].update({"pmin_mw": 120}), "generators[1]", "pmin_mw <= pmax_mw"),
    (lambda d: d["buses"][0].update({"demand_mw": "a lot"}), "buses[0].demand_mw", "number"),
    (lambda d: d.pop("lines"), "lines", "missing"),
])
def test_parse_errors_name_the_field(tri3, mutate, path, message):
    with pytest.raises(InstanceError) as info:
        parse_network(_edit(tri3, mutate))
    assert info.value.path == path
    assert message in str(info.value)


def test_not_json():
    with pytest.raises(InstanceError):
        parse_network("{buses: ")


def test_validate_tri3_clean(tri3):
    assert validate_network(tri3) == []


def test_validate_disconnected(tri3):
    net = tri3.with_switchable(["L1", "L3"])
    assert "non-switchable subgraph does not span all buses" in validate_network(net)


def test_validate_short_capacity(tri3):
    problems = validate_network(tri3.with_demands({2: 250.0}))
    assert any(p.startswith("total pmax below total demand") and "200 < 250" in p for p in problems)


def test_generate_tri3(tri3):
    nets = generate_instances(tri3, 7, 2)
    assert [n.name for n in nets] == ["tri3-s7-000", "tri3-s7-001"]
    for net in nets:
        assert len(net.switchable_ids) == 1
        assert sum(not line.switchable for line in net.lines) == 2
        assert 54.0 <= net.buses[1].demand_mw <= 66.0
        assert net.rng_name == RNG_NAME and net.seed == 7
        assert net.generators == tri3.generators
        assert [(l.from_bus, l.to_bus, l.b, l.capacity_mw) for l in net.lines] == \
            [(l.from_bus, l.to_bus, l.b, l.capacity_mw) for l in tri3.lines]
    again = generate_instances(tri3, 7, 2)
    assert [render_network(n) for n in nets] == [render_network(n) for n in again]


def test_generate_frozen_draws(tri3):
    # drawn by hand from PCG64(SeedSequence([7, i])): three line weights, then three demand factors;
    # on a triangle the spanning tree drops the heaviest line
    nets = generate_instances(tri3, 7, 2)
    assert [n.switchable_ids for n in nets] == [["L2"], ["L1"]]
    assert [n.buses[1].demand_mw for n in nets] == [57.601995418934706, 59.18362586443373]


def test_generate_zero_demand(tri3):
    base = tri3.with_demands({2: 0.0})
    assert all(b.demand_mw == 0.0 for n in generate_instances(base, 3, 4) for b in n.buses)


def test_generate_disconnected_base(tri3):
    net = parse_network(_edit(tri3, lambda d: d["buses"].append({"id": 4, "demand_mw": 0.0})))
    with pytest.raises(InstanceError):
        generate_instances(net, 1, 1)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), n_buses=st.integers(2, 12), extra=st.integers(0, 8), count=st.integers(1, 3))
def test_generated_instances_are_valid_trees(seed, n_buses, extra, count):
    base = synthetic_network(seed, n_buses, n_buses - 1 + extra)
    for net in generate_instances(base, seed, count):
        assert validate_network(net) == []
        assert sum(not line.switchable for line in net.lines) == n_buses - 1
        for bus, orig in zip(net.buses, base.buses):
            assert 0.9 * orig.demand_mw - 1e-12 <= bus.demand_mw <= 1.1 * orig.demand_mw + 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), n_buses=st.integers(2, 12), extra=st.integers(0, 6))
def test_render_parse_round_trip(seed, n_buses, extra):
    net = generate_instances(synthetic_network(seed, n_buses, n_buses - 1 + extra), seed, 1)[0]
    assert parse_network(render_network(net)) == net


def test_bounds_round_trip(tri3):
    b = physical_bounds(tri3).with_bigm("L3", 100.0, 100.0).with_capacity("L2", -10.0, 50.0)
    b = BoundsState(b.capacities, b.bigms, 3000.0003, "BT-RC-N(1)", 1, frozenset({"L3"}), frozenset())
    back = read_bounds(write_bounds(b), tri3)
    assert back == b
    assert back.capacities["L2"] == (-10.0, 50.0)


@settings(max_examples=50)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=4, max_size=4))
def test_bounds_reals_round_trip_exactly(vals):
    b = BoundsState({"L1": (vals[0], vals[1])}, {"L1": (vals[2], vals[3])}, None)
    assert read_bounds(write_bounds(b)) == b


def test_bounds_missing_line(tri3):
    doc = json.loads(write_bounds(physical_bounds(tri3)))
    del doc["capacities"]["L2"]
    with pytest.raises(InstanceError, match="L2"):
        read_bounds(json.dumps(doc), tri3)
    doc = json.loads(write_bounds(physical_bounds(tri3)))
    del doc["bigms"]["L3"]
    with pytest.raises(InstanceError, match="L3"):
        read_bounds(json.dumps(doc), tri3)


def test_bounds_malformed_number(tri3):
    doc = json.loads(write_bounds(physical_bounds(tri3)))
    doc["capacities"]["L1"]["f_pos"] = "fifty"
    with pytest.raises(InstanceError, match="capacities.L1.f_pos"):
        read_bounds(json.dumps(doc))


def test_synthetic_network_is_connected():
    net = synthetic_network(3, 10, 15)
    assert len(net.buses) == 10 and len(net.lines) == 15
    assert math.isclose(sum(g.pmax_mw for g in net.generators), 1.6 * net.total_demand + 5 * len(net.generators),
                        rel_tol=1e-2)
