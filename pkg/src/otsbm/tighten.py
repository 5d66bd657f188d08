"""Cost-driven bound tightening (SP-OC / SP-RC / BT-OC / BT-RC, naive or heuristic cap)."""
from __future__ import annotations

import re
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from .graph import sp_bigm
from .metrics import delta_l, delta_m
from .model import BoundsState, Network, physical_bounds
from .optcore import solve_lp
from .otsbuild import build_bl_lp, build_bm_lp, build_dcopf, naive_cost_bound

# The cost cap handed to bounding LPs is padded by this relative amount so that
# simplex round-off cannot cut off a dispatch whose cost equals the cap.
CAP_PAD = 1e-7

_LABEL_RE = re.compile(r"^(SP|BT)-(OC|RC)(?:-([NH])(?:\((\d+)\))?)?$")


class TighteningError(RuntimeError):
    """A bounding problem was unbounded or the bounding region turned out empty."""


@dataclass(frozen=True)
class TighteningConfig:
    bigm_rule: str = "BT"  # SP | BT
    capacity_rule: str = "RC"  # OC | RC
    cost_bound: str = "heuristic"  # naive | heuristic
    iterations: int = 4
    update_order: tuple[str, ...] | None = None
    name: str | None = None

    def __post_init__(self):
        if self.bigm_rule not in ("SP", "BT"):
            raise ValueError(f"bigm_rule must be SP or BT, got {self.bigm_rule!r}")
        if self.capacity_rule not in ("OC", "RC"):
            raise ValueError(f"capacity_rule must be OC or RC, got {self.capacity_rule!r}")
        if self.cost_bound not in ("naive", "heuristic"):
            raise ValueError(f"cost_bound must be naive or heuristic, got {self.cost_bound!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")

    @property
    def is_baseline(self) -> bool:
        return self.bigm_rule == "SP" and self.capacity_rule == "OC"

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.is_baseline:
            return "SP-OC"
        tag = "H" if self.cost_bound == "heuristic" else "N"
        return f"{self.bigm_rule}-{self.capacity_rule}-{tag}({self.iterations})"

    @classmethod
    def from_label(cls, label: str, iterations: int | None = None) -> "TighteningConfig":
        """Parse ``"BT-RC-H(4)"``, ``"sp-rc-n"``, ``"SP-OC"`` or ``"NONE"``."""
        text = label.strip().upper()
        if text == "NONE":
            return cls("SP", "OC", "naive", 0, name="NONE")
        match = _LABEL_RE.match(text)
        if not match:
            raise ValueError(f"unrecognized method label {label!r}")
        rule, caps, tag, k = match.groups()
        if k is not None:
            iterations = int(k)
        cost = "naive" if tag == "N" else "heuristic"
        return cls(rule, caps, cost, 4 if iterations is None else iterations)


@dataclass
class TighteningReport:
    bounds: BoundsState
    snapshots: list[tuple[float, float]]
    history: list[BoundsState]
    t_bnd_s: float
    t_cost_s: float
    cost_cap: float
    cost_cap_used: float
    pinned_closed: frozenset[str]
    pinned_open: frozenset[str]
    lp_count: int = 0
    heuristic_topology: dict[str, int] = field(default_factory=dict)


class _Clock:
    def __init__(self):
        self.seconds = 0.0
        self.count = 0

    def solve(self, model):
        out = solve_lp(model)
        self.seconds += out.wall_time_s
        self.count += 1
        return out


def heuristic_cost_bound(net: Network) -> tuple[float, dict[str, int]]:
    """Greedy switching: open the single line that lowers cost most, until none does."""
    topo = {lid: 1 for lid in net.switchable_ids}
    base = solve_lp(build_dcopf(net, topo))
    if base.status != "optimal":
        raise TighteningError("DC-OPF with every line in service is infeasible")
    best = base.objective
    while True:
        choice, choice_cost = None, best
        for lid in sorted(k for k, v in topo.items() if v == 1):
            trial = dict(topo)
            trial[lid] = 0
            out = solve_lp(build_dcopf(net, trial))
            if out.status == "optimal" and out.objective < choice_cost - 1e-9 * max(1.0, abs(choice_cost)):
                choice, choice_cost = lid, out.objective
        if choice is None:
            return best, topo
        topo[choice] = 0
        best = choice_cost


def _order(net: Network, order: Sequence[str] | None, switchable_only: bool) -> list[str]:
    ids = net.switchable_ids if switchable_only else sorted(line.id for line in net.lines)
    if order is None:
        return ids
    wanted = set(ids)
    return [lid for lid in order if lid in wanted]


def update_bigms_bm(net: Network, b: BoundsState, cost_cap: float, order: Sequence[str] | None = None,
                    clock: _Clock | None = None) -> BoundsState:
    """One pass of cost-capped big-M bounding LPs, applied line by line."""
    clock = clock or _Clock()
    for lid in _order(net, order, switchable_only=True):
        if lid in b.pinned_closed:
            continue
        result = []
        for direction in ("nm", "mn"):
            out = clock.solve(build_bm_lp(net, b, cost_cap, lid, direction))
            if out.status == "unbounded":
                raise TighteningError(f"big-M bounding LP for {lid} ({direction}) is unbounded")
            if out.status == "infeasible":
                break
            result.append(max(out.objective, 0.0))
        if len(result) < 2:
            if lid in b.pinned_open:
                raise TighteningError(f"line {lid} pinned both open and closed; cost cap below optimum?")
            b = replace(b, pinned_closed=b.pinned_closed | {lid})
        else:
            b = b.with_bigm(lid, *result)
    return b


def update_capacities_bl(net: Network, b: BoundsState, cost_cap: float, order: Sequence[str] | None = None,
                         clock: _Clock | None = None) -> BoundsState:
    """One pass of cost-capped maximum-flow bounding LPs over every line."""
    clock = clock or _Clock()
    for lid in _order(net, order, switchable_only=False):
        line = net.line(lid)
        if line.switchable and lid in b.pinned_open:
            continue
        result = []
        for direction in ("nm", "mn"):
            out = clock.solve(build_bl_lp(net, b, cost_cap, lid, direction))
            if out.status == "unbounded":
                raise TighteningError(f"capacity bounding LP for {lid} ({direction}) is unbounded")
            if out.status == "infeasible":
                break
            result.append(out.objective)
        if len(result) < 2:
            if not line.switchable:
                raise TighteningError(f"no dispatch under cost cap {cost_cap:g}; bounding region is empty")
            if lid in b.pinned_closed:
                raise TighteningError(f"line {lid} pinned both open and closed; cost cap below optimum?")
            b = replace(b, pinned_open=b.pinned_open | {lid})
        else:
            b = b.with_capacity(lid, *result)
    return b


def initial_bounds(net: Network) -> BoundsState:
    """Physical capacities with shortest-path big-Ms (the SP-OC bounds)."""
    return sp_bigm(net, physical_bounds(net))


def run_algorithm1(net: Network, cfg: TighteningConfig) -> TighteningReport:
    clock = _Clock()
    b = initial_bounds(net)
    b0 = b

    t0 = time.perf_counter()
    topo: dict[str, int] = {}
    if cfg.cost_bound == "naive":
        cap = naive_cost_bound(net)
    else:
        cap, topo = heuristic_cost_bound(net)
    t_cost = time.perf_counter() - t0
    cap_used = cap + CAP_PAD * max(1.0, abs(cap))

    def snapshot(bounds: BoundsState) -> tuple[float, float]:
        return delta_m(bounds, b0)[1] if bounds.bigms else 100.0, delta_l(bounds, net)[1]

    snapshots = [snapshot(b)]
    history = [b]
    if not cfg.is_baseline:
        for _ in range(cfg.iterations):
            if cfg.bigm_rule == "SP":  # SP-RC: capacities first, then shortest paths on them
                b = update_capacities_bl(net, b, cap_used, cfg.update_order, clock)
                b = sp_bigm(net, b)
            else:
                b = update_bigms_bm(net, b, cap_used, cfg.update_order, clock)
                if cfg.capacity_rule == "RC":
                    b = update_capacities_bl(net, b, cap_used, cfg.update_order, clock)
            snapshots.append(snapshot(b))
            history.append(b)

    b = replace(b, cost_cap=cap_used, method_label=cfg.label,
                iterations=0 if cfg.is_baseline else cfg.iterations)
    return TighteningReport(
        bounds=b,
        snapshots=snapshots,
        history=history,
        t_bnd_s=clock.seconds,
        t_cost_s=t_cost,
        cost_cap=cap,
        cost_cap_used=cap_used,
        pinned_closed=b.pinned_closed,
        pinned_open=b.pinned_open,
        lp_count=clock.count,
        heuristic_topology=topo,
    )
