"""Optimization models for DC optimal transmission switching.

Variable naming is shared by every builder: ``p[n]``, ``theta[n]``, ``f[line]``
and ``x[line]``. Flows follow the line orientation (positive from ``from_bus``
to ``to_bus``).
"""
from __future__ import annotations

import math
from typing import Literal, Mapping

from .model import BoundsState, Network, check_bounds, physical_bounds
from .optcore import LinearModel, MixedIntegerModel

INF = math.inf
Direction = Literal["nm", "mn"]
TopologyAssignment = Mapping[str, int]


class AggregateInfeasible(ValueError):
    """Total demand cannot be met by total generation limits."""


def p(n: int) -> str:
    return f"p[{n}]"


def theta(n: int) -> str:
    return f"theta[{n}]"


def flow(line_id: str) -> str:
    return f"f[{line_id}]"


def status(line_id: str) -> str:
    return f"x[{line_id}]"


def _dispatch_block(model: LinearModel, net: Network) -> None:
    for bus in net.buses:
        gen = net.generator_at(bus.id)
        model.add_variable(p(bus.id), gen.pmin_mw, gen.pmax_mw)
        if bus.id == net.slack_bus:
            model.add_variable(theta(bus.id), 0.0, 0.0)
        else:
            model.add_variable(theta(bus.id), -INF, INF)


def _balance_rows(model: LinearModel, net: Network) -> None:
    for bus in net.buses:
        row: dict[str, float] = {p(bus.id): -1.0}
        for line in net.lines:
            if line.from_bus == bus.id:
                row[flow(line.id)] = row.get(flow(line.id), 0.0) + 1.0
            elif line.to_bus == bus.id:
                row[flow(line.id)] = row.get(flow(line.id), 0.0) - 1.0
        model.add_constraint(row, "=", -bus.demand_mw, name=f"balance[{bus.id}]")


def _cost(net: Network) -> dict[str, float]:
    return {p(bus.id): net.generator_at(bus.id).cost_per_mwh for bus in net.buses}


def angle_objective(net: Network, line_id: str, direction: Direction) -> dict[str, float]:
    line = net.line(line_id)
    sgn = 1.0 if direction == "nm" else -1.0
    return {theta(line.from_bus): sgn * line.b, theta(line.to_bus): -sgn * line.b}


def build_dcopf(net: Network, topo: TopologyAssignment | None = None,
                bounds: BoundsState | None = None) -> LinearModel:
    """Fixed-topology DC-OPF; open lines carry no flow and decouple their angles."""
    topo = topo or {}
    caps = (bounds or physical_bounds(net)).capacities
    m = LinearModel(f"dcopf:{net.name}", "min")
    _dispatch_block(m, net)
    for line in net.lines:
        closed = not line.switchable or topo.get(line.id, 1) == 1
        f_pos, f_neg = caps[line.id]
        if closed:
            m.add_variable(flow(line.id), -f_neg, f_pos)
            m.add_constraint({flow(line.id): 1.0, theta(line.from_bus): -line.b, theta(line.to_bus): line.b},
                             "=", 0.0, name=f"flowdef[{line.id}]")
        else:
            m.add_variable(flow(line.id), 0.0, 0.0)
    _balance_rows(m, net)
    m.set_objective(_cost(net))
    return m


def _switching_region(model: LinearModel, net: Network, b: BoundsState, binary: bool,
                      x_fix: Mapping[str, float] | None = None) -> None:
    """Dispatch, angles, flows and big-M rows shared by the MILP and the bounding LPs."""
    x_fix = dict(x_fix or {})
    _dispatch_block(model, net)
    for line in net.lines:
        f_pos, f_neg = b.capacities[line.id]
        if not line.switchable:
            model.add_variable(flow(line.id), -f_neg, f_pos)
            continue
        model.add_variable(flow(line.id), -INF, INF)
        if line.id in x_fix:
            lo = hi = x_fix[line.id]
        elif line.id in b.pinned_closed:
            lo = hi = 1.0
        elif line.id in b.pinned_open:
            lo = hi = 0.0
        else:
            lo, hi = 0.0, 1.0
        if binary:
            model.add_binary(status(line.id), lo, hi)
        else:
            model.add_variable(status(line.id), lo, hi)

    for line in net.lines:
        f, th_n, th_m = flow(line.id), theta(line.from_bus), theta(line.to_bus)
        if not line.switchable:
            model.add_constraint({f: 1.0, th_n: -line.b, th_m: line.b}, "=", 0.0, name=f"flowdef[{line.id}]")
            continue
        x = status(line.id)
        f_pos, f_neg = b.capacities[line.id]
        m_pos, m_neg = b.bigms[line.id]
        model.add_constraint({f: 1.0, x: -f_pos}, "<=", 0.0, name=f"fmax[{line.id}]")
        model.add_constraint({f: 1.0, x: f_neg}, ">=", 0.0, name=f"fmin[{line.id}]")
        model.add_constraint({f: 1.0, th_n: -line.b, th_m: line.b, x: -m_pos}, ">=", -m_pos,
                             name=f"bigm_nm[{line.id}]")
        model.add_constraint({f: 1.0, th_n: -line.b, th_m: line.b, x: m_neg}, "<=", m_neg,
                             name=f"bigm_mn[{line.id}]")
    _balance_rows(model, net)


def build_ots_milp(net: Network, b: BoundsState) -> MixedIntegerModel:
    check_bounds(net, b)
    m = MixedIntegerModel(f"ots:{net.name}", "min")
    _switching_region(m, net, b, binary=True)
    m.set_objective(_cost(net))
    return m


def _bounding_lp(net: Network, b: BoundsState, cost_cap: float, line_id: str, direction: Direction,
                 x_line: float) -> LinearModel:
    check_bounds(net, b)
    line = net.line(line_id)
    fix = {line_id: x_line} if line.switchable else {}
    m = LinearModel(f"bound:{line_id}:{direction}", "max")
    _switching_region(m, net, b, binary=False, x_fix=fix)
    m.add_constraint(_cost(net), "<=", cost_cap, name="cost_cap")
    m.set_objective(angle_objective(net, line_id, direction))
    return m


def build_bm_lp(net: Network, b: BoundsState, cost_cap: float, line_id: str,
                direction: Direction) -> LinearModel:
    """Largest angle difference across an open switchable line under a cost cap."""
    if not net.line(line_id).switchable:
        raise ValueError(f"line {line_id} is not switchable")
    return _bounding_lp(net, b, cost_cap, line_id, direction, 0.0)


def build_bl_lp(net: Network, b: BoundsState, cost_cap: float, line_id: str,
                direction: Direction) -> LinearModel:
    """Largest flow in one direction over a line kept in service, under a cost cap."""
    return _bounding_lp(net, b, cost_cap, line_id, direction, 1.0)


def build_fixed_topology_angle_lp(net: Network, topo: TopologyAssignment, line_id: str,
                                  direction: Direction, cost_cap: float | None = None) -> LinearModel:
    """Angle-difference maximization over a fixed topology with physical limits."""
    m = build_dcopf(net, topo)
    if cost_cap is not None:
        m.add_constraint(_cost(net), "<=", cost_cap, name="cost_cap")
    m.set_objective(angle_objective(net, line_id, direction), sense="max")
    return m


def build_naive_cost_lp(net: Network) -> LinearModel:
    m = LinearModel(f"naive:{net.name}", "max")
    for bus in net.buses:
        gen = net.generator_at(bus.id)
        m.add_variable(p(bus.id), gen.pmin_mw, gen.pmax_mw)
    m.add_constraint({p(bus.id): 1.0 for bus in net.buses}, "=", net.total_demand, name="demand")
    m.set_objective(_cost(net))
    return m


def naive_cost_bound(net: Network) -> float:
    """Most expensive dispatch that meets total demand, ignoring the network."""
    gens = [net.generator_at(bus.id) for bus in net.buses]
    committed = math.fsum(g.pmin_mw for g in gens)
    remaining = net.total_demand - committed
    headroom = math.fsum(g.pmax_mw - g.pmin_mw for g in gens)
    if remaining < -1e-9 or remaining > headroom + 1e-9:
        raise AggregateInfeasible(
            f"demand {net.total_demand:g} MW outside generation range [{committed:g}, {committed + headroom:g}]")
    cost = math.fsum(g.cost_per_mwh * g.pmin_mw for g in gens)
    for g in sorted(gens, key=lambda g: (-g.cost_per_mwh, g.bus)):
        if remaining <= 0:
            break
        take = min(g.pmax_mw - g.pmin_mw, remaining)
        cost += g.cost_per_mwh * take
        remaining -= take
    return cost
