"""Network data model, instance/bounds file I/O and randomized instance generation.

Units are explicit throughout: power in MW, susceptance in MW/rad (so a line
flow is ``b * (theta_n - theta_m)`` in MW), cost in $/MWh.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

import numpy as np

RNG_NAME = "numpy.PCG64(SeedSequence([seed, index]))"


class InstanceError(ValueError):
    """Malformed instance or bounds file; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Bus:
    id: int
    demand_mw: float = 0.0


@dataclass(frozen=True)
class Generator:
    bus: int
    cost_per_mwh: float
    pmin_mw: float
    pmax_mw: float


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: int
    to_bus: int
    susceptance_mw_per_rad: float
    capacity_mw: float
    switchable: bool = False

    @property
    def b(self) -> float:
        return self.susceptance_mw_per_rad


@dataclass(frozen=True)
class Network:
    name: str
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    slack_bus: int
    rng_name: str | None = None
    seed: int | None = None

    @property
    def bus_ids(self) -> list[int]:
        return [bus.id for bus in self.buses]

    @property
    def switchable_lines(self) -> list[Line]:
        return [line for line in self.lines if line.switchable]

    @property
    def switchable_ids(self) -> list[str]:
        return sorted(line.id for line in self.lines if line.switchable)

    def line(self, line_id: str) -> Line:
        for line in self.lines:
            if line.id == line_id:
                return line
        raise KeyError(line_id)

    def generator_at(self, bus_id: int) -> Generator:
        """Generator at ``bus_id``; buses without one get a zero-capacity unit."""
        for gen in self.generators:
            if gen.bus == bus_id:
                return gen
        return Generator(bus=bus_id, cost_per_mwh=0.0, pmin_mw=0.0, pmax_mw=0.0)

    @property
    def total_demand(self) -> float:
        return math.fsum(bus.demand_mw for bus in self.buses)

    def with_demands(self, demands: Mapping[int, float]) -> "Network":
        buses = tuple(Bus(b.id, float(demands.get(b.id, b.demand_mw))) for b in self.buses)
        return replace(self, buses=buses)

    def with_switchable(self, switchable: Iterable[str]) -> "Network":
        chosen = set(switchable)
        lines = tuple(replace(line, switchable=line.id in chosen) for line in self.lines)
        return replace(self, lines=lines)


@dataclass(frozen=True)
class BoundsState:
    """Directional line capacities and big-M constants.

    ``capacities[line] = (f_pos, f_neg)`` means ``-f_neg <= f <= f_pos``;
    ``bigms[line] = (m_pos, m_neg)`` bound ``b*(theta_n - theta_m)`` and
    ``b*(theta_m - theta_n)`` while the switchable line is open.
    """

    capacities: Mapping[str, tuple[float, float]]
    bigms: Mapping[str, tuple[float, float]]
    cost_cap: float | None = None
    method_label: str = ""
    iterations: int = 0
    pinned_closed: frozenset[str] = field(default_factory=frozenset)
    pinned_open: frozenset[str] = field(default_factory=frozenset)

    def with_capacity(self, line_id: str, f_pos: float, f_neg: float) -> "BoundsState":
        caps = dict(self.capacities)
        caps[line_id] = (float(f_pos), float(f_neg))
        return replace(self, capacities=caps)

    def with_bigm(self, line_id: str, m_pos: float, m_neg: float) -> "BoundsState":
        bigms = dict(self.bigms)
        bigms[line_id] = (float(m_pos), float(m_neg))
        return replace(self, bigms=bigms)


def physical_bounds(net: Network) -> BoundsState:
    """Symmetric physical capacities; big-Ms zeroed until computed."""
    caps = {line.id: (line.capacity_mw, line.capacity_mw) for line in net.lines}
    bigms = {line.id: (0.0, 0.0) for line in net.lines if line.switchable}
    return BoundsState(capacities=caps, bigms=bigms)


# ---------------------------------------------------------------------------
# instance files


def _require(obj: Mapping[str, Any], key: str, path: str) -> Any:
    if not isinstance(obj, Mapping):
        raise InstanceError(path, "expected an object")
    if key not in obj:
        raise InstanceError(f"{path}.{key}" if path else key, "missing field")
    return obj[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(path, f"expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise InstanceError(path, "non-finite number")
    return out


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(path, f"expected an integer, got {value!r}")
    return value


def parse_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("", f"not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InstanceError("", "top level must be an object")
    header = doc.get("header", {})
    if not isinstance(header, dict):
        raise InstanceError("header", "expected an object")

    buses: list[Bus] = []
    seen_bus: set[int] = set()
    for i, raw in enumerate(_require(doc, "buses", "")):
        path = f"buses[{i}]"
        bid = _integer(_require(raw, "id", path), f"{path}.id")
        if bid <= 0:
            raise InstanceError(f"{path}.id", "bus id must be positive")
        if bid in seen_bus:
            raise InstanceError(f"{path}.id", f"duplicate bus id {bid}")
        seen_bus.add(bid)
        demand = _number(raw.get("demand_mw", 0.0), f"{path}.demand_mw")
        if demand < 0:
            raise InstanceError(f"{path}.demand_mw", "negative demand")
        buses.append(Bus(bid, demand))
    if not buses:
        raise InstanceError("buses", "network has no buses")

    generators: list[Generator] = []
    gen_bus: set[int] = set()
    for i, raw in enumerate(doc.get("generators", [])):
        path = f"generators[{i}]"
        bus = _integer(_require(raw, "bus", path), f"{path}.bus")
        if bus not in seen_bus:
            raise InstanceError(f"{path}.bus", f"unknown bus {bus}")
        if bus in gen_bus:
            raise InstanceError(f"{path}.bus", f"second generator at bus {bus}")
        gen_bus.add(bus)
        cost = _number(_require(raw, "cost_per_mwh", path), f"{path}.cost_per_mwh")
        pmin = _number(raw.get("pmin_mw", 0.0), f"{path}.pmin_mw")
        pmax = _number(_require(raw, "pmax_mw", path), f"{path}.pmax_mw")
        if cost < 0:
            raise InstanceError(f"{path}.cost_per_mwh", "negative cost")
        if not 0 <= pmin <= pmax:
            raise InstanceError(path, "need 0 <= pmin_mw <= pmax_mw")
        generators.append(Generator(bus, cost, pmin, pmax))

    lines: list[Line] = []
    seen_line: set[str] = set()
    for i, raw in enumerate(_require(doc, "lines", "")):
        path = f"lines[{i}]"
        lid = _require(raw, "id", path)
        if not isinstance(lid, str) or not lid:
            raise InstanceError(f"{path}.id", "line id must be a non-empty string")
        if lid in seen_line:
            raise InstanceError(f"{path}.id", f"duplicate line id {lid!r}")
        seen_line.add(lid)
        src = _integer(_require(raw, "from", path), f"{path}.from")
        dst = _integer(_require(raw, "to", path), f"{path}.to")
        for key, bus in (("from", src), ("to", dst)):
            if bus not in seen_bus:
                raise InstanceError(f"{path}.{key}", f"unknown bus {bus}")
        if src == dst:
            raise InstanceError(path, "self-loop line")
        b = _number(_require(raw, "susceptance_mw_per_rad", path), f"{path}.susceptance_mw_per_rad")
        cap = _number(_require(raw, "capacity_mw", path), f"{path}.capacity_mw")
        if b <= 0:
            raise InstanceError(f"{path}.susceptance_mw_per_rad", "susceptance must be positive")
        if cap <= 0:
            raise InstanceError(f"{path}.capacity_mw", "capacity must be positive")
        switchable = raw.get("switchable", False)
        if not isinstance(switchable, bool):
            raise InstanceError(f"{path}.switchable", "expected a boolean")
        lines.append(Line(lid, src, dst, b, cap, switchable))

    slack = doc.get("slack_bus")
    if slack is None:
        slack = min(seen_bus)
    else:
        slack = _integer(slack, "slack_bus")
        if slack not in seen_bus:
            raise InstanceError("slack_bus", f"unknown bus {slack}")

    seed = header.get("seed")
    return Network(
        name=str(header.get("name", doc.get("name", "unnamed"))),
        buses=tuple(buses),
        generators=tuple(generators),
        lines=tuple(lines),
        slack_bus=slack,
        rng_name=header.get("rng_name"),
        seed=None if seed is None else _integer(seed, "header.seed"),
    )


def render_network(net: Network) -> str:
    header: dict[str, Any] = {"name": net.name}
    if net.rng_name is not None:
        header["rng_name"] = net.rng_name
    if net.seed is not None:
        header["seed"] = net.seed
    doc = {
        "header": header,
        "buses": [{"id": b.id, "demand_mw": b.demand_mw} for b in net.buses],
        "generators": [
            {"bus": g.bus, "cost_per_mwh": g.cost_per_mwh, "pmin_mw": g.pmin_mw, "pmax_mw": g.pmax_mw}
            for g in net.generators
        ],
        "lines": [
            {
                "id": ln.id,
                "from": ln.from_bus,
                "to": ln.to_bus,
                "susceptance_mw_per_rad": ln.susceptance_mw_per_rad,
                "capacity_mw": ln.capacity_mw,
                "switchable": ln.switchable,
            }
            for ln in net.lines
        ],
        "slack_bus": net.slack_bus,
    }
    return json.dumps(doc, indent=2) + "\n"


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def validate_network(net: Network) -> list[str]:
    from .graph import is_connected_spanning

    problems = []
    if not is_connected_spanning(net):
        problems.append("non-switchable subgraph does not span all buses")
    pmax = math.fsum(g.pmax_mw for g in net.generators)
    if pmax < net.total_demand:
        problems.append(f"total pmax below total demand ({pmax:g} < {net.total_demand:g})")
    pmin = math.fsum(g.pmin_mw for g in net.generators)
    if pmin > net.total_demand:
        problems.append(f"total pmin above total demand ({pmin:g} > {net.total_demand:g})")
    return problems


# ---------------------------------------------------------------------------
# bounds files


def write_bounds(b: BoundsState) -> str:
    doc = {
        "method_label": b.method_label,
        "iterations": b.iterations,
        "cost_cap": b.cost_cap,
        "capacities": {lid: {"f_pos": fp, "f_neg": fn} for lid, (fp, fn) in sorted(b.capacities.items())},
        "bigms": {lid: {"m_pos": mp, "m_neg": mn} for lid, (mp, mn) in sorted(b.bigms.items())},
        "pinned_closed": sorted(b.pinned_closed),
        "pinned_open": sorted(b.pinned_open),
    }
    return json.dumps(doc, indent=2) + "\n"


def read_bounds(text: str, net: Network | None = None) -> BoundsState:
    """Parse a bounds file; with ``net`` given, check every line has its entries."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("", f"not valid JSON ({exc})") from None
    caps = {}
    for lid, entry in _require(doc, "capacities", "").items():
        path = f"capacities.{lid}"
        caps[lid] = (_number(_require(entry, "f_pos", path), f"{path}.f_pos"),
                     _number(_require(entry, "f_neg", path), f"{path}.f_neg"))
    bigms = {}
    for lid, entry in _require(doc, "bigms", "").items():
        path = f"bigms.{lid}"
        bigms[lid] = (_number(_require(entry, "m_pos", path), f"{path}.m_pos"),
                      _number(_require(entry, "m_neg", path), f"{path}.m_neg"))
    cap = doc.get("cost_cap")
    bounds = BoundsState(
        capacities=caps,
        bigms=bigms,
        cost_cap=None if cap is None else _number(cap, "cost_cap"),
        method_label=str(doc.get("method_label", "")),
        iterations=_integer(doc.get("iterations", 0), "iterations"),
        pinned_closed=frozenset(doc.get("pinned_closed", ())),
        pinned_open=frozenset(doc.get("pinned_open", ())),
    )
    if net is not None:
        check_bounds(net, bounds)
    return bounds


def check_bounds(net: Network, b: BoundsState) -> None:
    for line in net.lines:
        if line.id not in b.capacities:
            raise InstanceError(f"capacities.{line.id}", f"missing capacity for line {line.id}")
        if line.switchable and line.id not in b.bigms:
            raise InstanceError(f"bigms.{line.id}", f"missing big-M for line {line.id}")


# ---------------------------------------------------------------------------
# random instances


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def random_spanning_tree(net: Network, rng: np.random.Generator) -> set[str]:
    """Kruskal MST over i.i.d. U(0,1) line weights (one draw per line, file order)."""
    from .graph import kruskal

    weights = rng.random(len(net.lines))
    edges = [(float(w), line.id, line.from_bus, line.to_bus) for w, line in zip(weights, net.lines)]
    tree = kruskal(net.bus_ids, edges)
    if len(tree) != len(net.buses) - 1:
        raise InstanceError("lines", "base network is disconnected; no spanning tree exists")
    return tree


def generate_instances(base: Network, seed: int, count: int) -> list[Network]:
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for i in range(count):
        rng = instance_rng(seed, i)
        tree = random_spanning_tree(base, rng)
        draws = rng.random(len(base.buses))
        demands = {bus.id: bus.demand_mw * (0.9 + 0.2 * float(u)) for bus, u in zip(base.buses, draws)}
        lines = tuple(replace(line, switchable=line.id not in tree) for line in base.lines)
        buses = tuple(Bus(bus.id, demands[bus.id]) for bus in base.buses)
        out.append(replace(base, name=f"{base.name}-s{seed}-{i:03d}", buses=buses, lines=lines,
                           rng_name=RNG_NAME, seed=seed))
    return out


def synthetic_network(seed: int, n_buses: int, n_lines: int, name: str | None = None) -> Network:
    """Random connected base network with congestion-prone line ratings.

    A random tree guarantees connectivity; extra lines join random bus pairs.
    Roughly 40% of buses host a generator; total pmax is about 1.6x demand.
    All lines start non-switchable; ``generate_instances`` picks the switchable set.
    """
    if n_lines < n_buses - 1:
        raise ValueError("need at least n_buses - 1 lines")
    rng = instance_rng(seed, 10**6)
    ids = list(range(1, n_buses + 1))
    pairs = []
    for k in range(1, n_buses):
        pairs.append((int(rng.integers(1, k + 1)), k + 1))
    while len(pairs) < n_lines:
        a, b = (int(v) for v in rng.choice(ids, size=2, replace=False))
        pairs.append((a, b))
    demands = {i: float(round(rng.uniform(0, 40), 1)) if rng.random() < 0.7 else 0.0 for i in ids}
    total = sum(demands.values()) or 1.0
    n_gen = max(2, int(round(0.4 * n_buses)))
    gen_buses = sorted(int(v) for v in rng.choice(ids, size=n_gen, replace=False))
    share = rng.uniform(0.5, 1.5, size=n_gen)
    share = share / share.sum()
    generators = tuple(
        Generator(bus, float(round(rng.uniform(10, 60), 1)), 0.0, float(round(1.6 * total * s + 5.0, 1)))
        for bus, s in zip(gen_buses, share)
    )
    lines = tuple(
        Line(f"L{k + 1}", a, b, float(round(rng.uniform(50, 200), 1)),
             float(round(rng.uniform(0.06, 0.3) * total, 1)) + 5.0)
        for k, (a, b) in enumerate(pairs)
    )
    return Network(
        name=name or f"syn{n_buses}-{seed}",
        buses=tuple(Bus(i, demands[i]) for i in ids),
        generators=generators,
        lines=lines,
        slack_bus=1,
    )
