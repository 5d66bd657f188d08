"""Brute-force oracles and the tightening benchmark sweep."""
from __future__ import annotations

import csv
import io
import itertools
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .metrics import delta_l, delta_m
from .model import Network, write_bounds
from .optcore import solve_lp, solve_milp
from .otsbuild import Direction, build_dcopf, build_fixed_topology_angle_lp, build_ots_milp
from .tighten import TighteningConfig, initial_bounds, run_algorithm1

BRUTE_FORCE_LIMIT = 20
ORACLE_LIMIT = 12

RESULT_COLUMNS = ["instance_id", "method", "iterations", "delta_m_pct", "delta_l_pct",
                  "t_bnd_s", "t_ots_s", "status", "gap_pct", "objective"]


class OracleError(ValueError):
    pass


def topology_costs(net: Network) -> dict[tuple[int, ...], float | None]:
    """DC-OPF cost of every topology, keyed by open flags over ascending line id.

    ``None`` marks an infeasible topology. Keys are generated in lexicographic
    order, so the all-closed topology comes first.
    """
    ids = net.switchable_ids
    if len(ids) > BRUTE_FORCE_LIMIT:
        raise OracleError(f"{len(ids)} switchable lines exceed the brute-force limit of {BRUTE_FORCE_LIMIT}")
    costs = {}
    for opened in itertools.product((0, 1), repeat=len(ids)):
        topo = {lid: 1 - o for lid, o in zip(ids, opened)}
        out = solve_lp(build_dcopf(net, topo))
        costs[opened] = out.objective if out.status == "optimal" else None
    return costs


def _tied(a: float, b: float, rel: float = 1e-9) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def brute_force_ots(net: Network, costs: dict | None = None) -> tuple[float, dict[str, int]]:
    costs = topology_costs(net) if costs is None else costs
    best_key, best = None, math.inf
    for key, cost in costs.items():
        if cost is not None and (best_key is None or (cost < best and not _tied(cost, best))):
            best_key, best = key, cost
    if best_key is None:
        raise OracleError("every topology is infeasible")
    return best, {lid: 1 - o for lid, o in zip(net.switchable_ids, best_key)}


def optimal_topologies(net: Network, costs: dict | None = None, rel: float = 1e-7) -> list[dict[str, int]]:
    costs = topology_costs(net) if costs is None else costs
    best, _ = brute_force_ots(net, costs)
    return [{lid: 1 - o for lid, o in zip(net.switchable_ids, key)}
            for key, cost in costs.items() if cost is not None and _tied(cost, best, rel)]


def exact_bigm_oracle(net: Network, line_id: str, direction: Direction,
                      cost_cap: float | None = None) -> float:
    """Largest ``b * angle difference`` over integer topologies with the line open."""
    ids = net.switchable_ids
    if line_id not in ids:
        raise OracleError(f"line {line_id} is not switchable")
    if len(ids) > ORACLE_LIMIT:
        raise OracleError(f"{len(ids)} switchable lines exceed the oracle limit of {ORACLE_LIMIT}")
    others = [lid for lid in ids if lid != line_id]
    best = -math.inf
    for statuses in itertools.product((0, 1), repeat=len(others)):
        topo = dict(zip(others, statuses))
        topo[line_id] = 0
        out = solve_lp(build_fixed_topology_angle_lp(net, topo, line_id, direction, cost_cap))
        if out.status == "unbounded":
            raise OracleError(f"angle difference unbounded for topology {topo}")
        if out.status == "optimal":
            best = max(best, out.objective)
    return best


# ---------------------------------------------------------------------------
# sweep


@dataclass
class BenchmarkRecord:
    instance_id: str
    method_label: str
    iterations: int
    delta_m_pct: float
    delta_l_pct: float
    t_bnd_s: float
    t_ots_s: float
    status: str
    gap_pct: float | None
    objective: float
    node_count: int = 0

    def row(self) -> list:
        gap = "" if self.gap_pct is None else repr(self.gap_pct)
        return [self.instance_id, self.method_label, self.iterations, repr(self.delta_m_pct),
                repr(self.delta_l_pct), repr(self.t_bnd_s), repr(self.t_ots_s), self.status, gap,
                repr(self.objective)]


@dataclass
class BenchResult:
    records: list[BenchmarkRecord]
    curves: dict[str, list[tuple[float, int]]]
    summary: str


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def bounds_filename(instance_id: str, method_label: str) -> str:
    return f"{_safe(instance_id)}__{_safe(method_label)}.bounds.json"


def run_cell(net: Network, cfg: TighteningConfig, time_limit_s: float, rel_gap: float,
             bounds_dir: str | None = None) -> BenchmarkRecord:
    try:
        report = run_algorithm1(net, cfg)
        _, dm = delta_m(report.bounds, initial_bounds(net)) if net.switchable_ids else ({}, 100.0)
        _, dl = delta_l(report.bounds, net)
        if bounds_dir is not None:
            path = Path(bounds_dir) / bounds_filename(net.name, cfg.label)
            path.write_text(write_bounds(report.bounds), encoding="utf-8")
        out = solve_milp(build_ots_milp(net, report.bounds), time_limit_s, rel_gap)
    except Exception as exc:  # a failed cell is recorded, never fatal to the sweep
        return BenchmarkRecord(net.name, cfg.label, cfg.iterations, math.nan, math.nan, math.nan, math.nan,
                               f"error:{type(exc).__name__}", None, math.nan)
    gap = None if out.status == "optimal" else 100.0 * out.gap
    return BenchmarkRecord(net.name, cfg.label, report.bounds.iterations, dm, dl, report.t_bnd_s,
                           out.wall_time_s, out.status, gap, out.objective, out.node_count)


def _run_cell_args(args):
    return run_cell(*args)


def cumulative_curves(records: Iterable[BenchmarkRecord]) -> dict[str, list[tuple[float, int]]]:
    curves: dict[str, list[tuple[float, int]]] = {}
    by_method: dict[str, list[float]] = {}
    for rec in records:
        by_method.setdefault(rec.method_label, [])
        if rec.status == "optimal":
            by_method[rec.method_label].append(rec.t_ots_s)
    for method, times in by_method.items():
        curves[method] = [(t, k + 1) for k, t in enumerate(sorted(times))]
    return curves


def summarize(records: Sequence[BenchmarkRecord], methods: Sequence[str]) -> str:
    """Table with mean ranges/times, unsolved count and worst gap among unsolved."""
    lines = [
        "# NONE rows: shortest-path big-Ms on original capacities (stand-in for a solver-internal baseline)",
        f"{'Method':<14}{'dM':>9}{'dL':>9}{'T_bnd':>10}{'T_ots':>10}{'#U':>5}{'Max gap':>10}",
    ]
    for method in methods:
        rows = [r for r in records if r.method_label == method]
        if not rows:
            continue

        def mean(vals):
            vals = [v for v in vals if not math.isnan(v)]
            return math.fsum(vals) / len(vals) if vals else math.nan

        unsolved = [r for r in rows if r.status != "optimal"]
        gaps = [r.gap_pct for r in unsolved if r.gap_pct is not None and math.isfinite(r.gap_pct)]
        max_gap = f"{max(gaps):.2f}%" if gaps else "-"
        lines.append(f"{method:<14}{mean(r.delta_m_pct for r in rows):>8.1f}%{mean(r.delta_l_pct for r in rows):>8.1f}%"
                     f"{mean(r.t_bnd_s for r in rows):>9.3f}s{mean(r.t_ots_s for r in rows):>9.3f}s"
                     f"{len(unsolved):>5}{max_gap:>10}")
    return "\n".join(lines) + "\n"


def run_benchmark(instances: Sequence[Network], methods: Sequence[TighteningConfig], time_limit_s: float = 3600.0,
                  rel_gap: float = 1e-4, jobs: int = 1, bounds_dir: str | None = None) -> BenchResult:
    if not methods:
        raise ValueError("no methods given")
    cells = [(net, cfg, time_limit_s, rel_gap, bounds_dir) for net in instances for cfg in methods]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_cell_args, cells))
    else:
        records = [run_cell(*cell) for cell in cells]
    records.sort(key=lambda r: (r.instance_id, r.method_label))
    labels = list(dict.fromkeys(cfg.label for cfg in methods))
    return BenchResult(records, cumulative_curves(records), summarize(records, labels))


def records_csv(records: Iterable[BenchmarkRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def curves_csv(curves: dict[str, list[tuple[float, int]]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "time_s", "n_solved"])
    for method in sorted(curves):
        for t, n in curves[method]:
            writer.writerow([method, repr(t), n])
    return buf.getvalue()
