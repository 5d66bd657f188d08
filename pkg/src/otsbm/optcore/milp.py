"""Branch-and-bound over binary variables on top of the dense simplex."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearModel, solve_dense

INT_TOL = 1e-6


class MixedIntegerModel(LinearModel):
    """A :class:`LinearModel` whose ``binaries`` must take values in {0, 1}."""

    def __init__(self, name: str = "", sense: str = "min"):
        super().__init__(name, sense)
        self.binaries: set[str] = set()

    def add_binary(self, name: str, lower: float = 0.0, upper: float = 1.0) -> str:
        if not 0.0 <= lower <= upper <= 1.0:
            raise ValueError(f"binary {name!r} needs bounds within [0, 1]")
        self.add_variable(name, lower, upper)
        self.binaries.add(name)
        return name

    def relaxation(self) -> LinearModel:
        out = LinearModel(self.name, self.sense)
        out.variables = list(self.variables)
        out.constraints = list(self.constraints)
        out.objective = dict(self.objective)
        out._index = dict(self._index)
        return out


@dataclass
class MilpOutcome:
    status: str  # optimal | feasible_time_limit | infeasible | no_incumbent_time_limit
    objective: float
    best_bound: float
    gap: float
    values: dict[str, float]
    wall_time_s: float
    node_count: int

    @property
    def solved(self) -> bool:
        return self.status == "optimal"


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    fixings: dict = field(compare=False, default_factory=dict)


def relative_gap(objective: float, best_bound: float) -> float:
    return (objective - best_bound) / max(abs(objective), 1e-10)


def solve_milp(m: MixedIntegerModel, time_limit_s: float = 3600.0, rel_gap: float = 1e-4) -> MilpOutcome:
    """Best-bound branch and bound with an initial depth-first dive.

    Branches on the most fractional binary (ties: lowest name). The node
    order never depends on timing, so node counts are reproducible; the time
    limit is only checked between nodes.
    """
    if time_limit_s <= 0:
        raise ValueError("time_limit_s must be positive")
    if rel_gap < 0:
        raise ValueError("rel_gap must be nonnegative")
    t0 = time.perf_counter()
    lp = m.compile()
    sign = -1.0 if lp.maximize else 1.0  # internal objective is always minimized
    bin_idx = sorted((name, m.index(name)) for name in m.binaries)

    incumbent_x = None
    incumbent = math.inf
    heap: list[_Node] = []
    stack: list[_Node] = [_Node(-math.inf, 0, {})]
    diving = True
    seq = 1
    nodes = 0
    timed_out = False

    def open_bound() -> float:
        bounds = [n.bound for n in heap] + [n.bound for n in stack]
        return min(bounds) if bounds else math.inf

    def prunable(bound: float) -> bool:
        if incumbent == math.inf:
            return False
        tol = max(rel_gap * max(abs(incumbent), 1e-10), 1e-9 * max(1.0, abs(incumbent)))
        return bound >= incumbent - tol

    def end_dive() -> None:
        nonlocal diving
        if diving:
            diving = False
            for node in stack:
                heapq.heappush(heap, node)
            stack.clear()

    while heap or stack:
        if nodes > 0 and time.perf_counter() - t0 >= time_limit_s:
            timed_out = True
            break
        node = stack.pop() if diving and stack else heapq.heappop(heap)
        if prunable(node.bound):
            continue
        lower, upper = lp.lower.copy(), lp.upper.copy()
        for j, val in node.fixings.items():
            lower[j] = upper[j] = val
        status, obj, x, _ = solve_dense(lp, lower, upper)
        nodes += 1
        if status != "optimal":
            # an unbounded relaxation with bounded binaries means an unbounded MILP
            # (or an infeasible one); both are outside this solver's contract
            end_dive()
            continue
        obj *= sign
        if prunable(obj):
            end_dive()
            continue
        frac = [(abs(x[j] - 0.5), name, j) for name, j in bin_idx
                if abs(x[j] - round(x[j])) > INT_TOL]
        if not frac:
            incumbent = obj
            incumbent_x = x.copy()
            for _, j in bin_idx:
                incumbent_x[j] = round(incumbent_x[j])
            end_dive()
            heap = [n for n in heap if not prunable(n.bound)]
            heapq.heapify(heap)
        else:
            _, _, j = min(frac)
            preferred = 1.0 if x[j] >= 0.5 else 0.0
            children = []
            for val in (1.0 - preferred, preferred):
                fix = dict(node.fixings)
                fix[j] = val
                children.append(_Node(obj, seq, fix))
                seq += 1
            if diving:
                stack.extend(children)  # preferred child popped first
            else:
                for child in children:
                    heapq.heappush(heap, child)
        if incumbent < math.inf:
            ob = open_bound()
            if ob == math.inf or relative_gap(incumbent, min(ob, incumbent)) <= rel_gap:
                break

    elapsed = time.perf_counter() - t0
    ob = open_bound()
    if incumbent_x is None:
        status = "no_incumbent_time_limit" if timed_out else "infeasible"
        best = ob if timed_out else math.inf
        return MilpOutcome(status, math.inf * sign, best * sign, math.inf, {}, elapsed, nodes)
    best = min(ob, incumbent)
    gap = relative_gap(incumbent, best)
    if timed_out and gap > rel_gap:
        status = "feasible_time_limit"
    else:
        status = "optimal"
    values = dict(zip(lp.names, incumbent_x.tolist()))
    return MilpOutcome(status, incumbent * sign, best * sign, max(gap, 0.0), values, elapsed, nodes)
