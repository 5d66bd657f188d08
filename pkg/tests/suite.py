"""Seeded random instance suite shared by the acceptance and property tests."""
from __future__ import annotations

from functools import lru_cache

from otsbm.model import generate_instances, synthetic_network
from otsbm.optcore import solve_lp
from otsbm.otsbuild import build_dcopf

SUITE_SIZE = 30


def suite_params(seed: int) -> tuple[int, int]:
    n_buses = 8 + seed % 7
    n_switchable = 4 + (seed * 5) % 9  # 4..12
    return n_buses, n_switchable


def suite_instance(seed: int):
    n_buses, n_switchable = suite_params(seed)
    base = synthetic_network(seed, n_buses, n_buses - 1 + n_switchable)
    return generate_instances(base, seed, 1)[0]


def all_closed_feasible(net) -> bool:
    topo = {lid: 1 for lid in net.switchable_ids}
    return solve_lp(build_dcopf(net, topo)).status == "optimal"


@lru_cache(maxsize=None)
def random_suite(size: int = SUITE_SIZE) -> tuple:
    """(seed, network) pairs; seeds whose all-closed dispatch is infeasible are skipped."""
    out = []
    seed = 0
    while len(out) < size:
        net = suite_instance(seed)
        if all_closed_feasible(net):
            out.append((seed, net))
        seed += 1
    return tuple(out)
