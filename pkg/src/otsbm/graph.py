"""Connectivity checks and shortest-path big-M constants."""
from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable

from .model import BoundsState, Network


class DisconnectedNetworkError(RuntimeError):
    """The non-switchable lines do not connect the endpoints of a switchable line."""


class UnionFind:
    def __init__(self, items: Iterable):
        self.parent = {item: item for item in items}

    def find(self, item):
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def kruskal(nodes: Iterable[int], edges: Iterable[tuple[float, str, int, int]]) -> set[str]:
    """Minimum spanning forest; edges are ``(weight, id, u, v)``, ties broken by id."""
    uf = UnionFind(nodes)
    return {eid for _, eid, u, v in sorted(edges, key=lambda e: (e[0], e[1])) if uf.union(u, v)}


def is_connected_spanning(net: Network) -> bool:
    uf = UnionFind(net.bus_ids)
    for line in net.lines:
        if not line.switchable:
            uf.union(line.from_bus, line.to_bus)
    return len({uf.find(b) for b in net.bus_ids}) <= 1


@dataclass
class DirectedCostGraph:
    nodes: list[int]
    arcs: dict[int, list[tuple[int, float, str]]] = field(default_factory=lambda: defaultdict(list))

    def add_arc(self, u: int, v: int, cost: float, line_id: str) -> None:
        self.arcs[u].append((v, cost, line_id))

    @classmethod
    def from_network(cls, net: Network, b: BoundsState) -> "DirectedCostGraph":
        # negative reduced capacities are clamped: Dijkstra needs nonnegative costs
        g = cls(net.bus_ids)
        for line in net.lines:
            if line.switchable:
                continue
            f_pos, f_neg = b.capacities[line.id]
            g.add_arc(line.from_bus, line.to_bus, max(f_pos, 0.0) / line.b, line.id)
            g.add_arc(line.to_bus, line.from_bus, max(f_neg, 0.0) / line.b, line.id)
        return g


def shortest_path_cost(g: DirectedCostGraph, s: int, t: int) -> float:
    """Dijkstra distance from ``s`` to ``t``; ``math.inf`` when unreachable."""
    if s == t:
        return 0.0
    dist = {s: 0.0}
    done = set()
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == t:
            return d
        done.add(u)
        for v, cost, _ in g.arcs.get(u, ()):
            nd = d + cost
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf


def sp_bigm(net: Network, b: BoundsState) -> BoundsState:
    """Big-Ms from shortest paths over the non-switchable lines.

    ``m_pos = b_nm * dist(n -> m)`` and ``m_neg = b_nm * dist(m -> n)``, with
    arc costs ``F_dir / b`` taken from the capacities currently in ``b``.
    """
    g = DirectedCostGraph.from_network(net, b)
    bigms = dict(b.bigms)
    for line in net.switchable_lines:
        fwd = shortest_path_cost(g, line.from_bus, line.to_bus)
        bwd = shortest_path_cost(g, line.to_bus, line.from_bus)
        if math.isinf(fwd) or math.isinf(bwd):
            raise DisconnectedNetworkError(
                f"line {line.id}: buses {line.from_bus} and {line.to_bus} are not joined by non-switchable lines")
        bigms[line.id] = (line.b * fwd, line.b * bwd)
    return replace(b, bigms=bigms)
