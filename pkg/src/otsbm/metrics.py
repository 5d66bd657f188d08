"""Relative big-M and line-capacity ranges against the untightened baseline."""
from __future__ import annotations

import math

from .model import BoundsState, Network


class DegenerateBaseline(ZeroDivisionError):
    def __init__(self, line_ids: list[str]):
        self.line_ids = line_ids
        super().__init__(f"baseline big-M is zero for lines {', '.join(line_ids)}")


def delta_m(b: BoundsState, b0: BoundsState) -> tuple[dict[str, float], float]:
    """Per-line ``100 (m_pos + m_neg) / (2 m0_pos)`` and its mean over switchable lines."""
    per_line = {}
    bad = []
    for lid, (m_pos, m_neg) in sorted(b0.bigms.items()):
        if m_pos == 0.0:
            bad.append(lid)
            continue
        mp, mn = b.bigms[lid]
        per_line[lid] = 100.0 * (mp + mn) / (2.0 * m_pos)
    if bad:
        raise DegenerateBaseline(bad)
    mean = math.fsum(per_line.values()) / len(per_line) if per_line else 100.0
    return per_line, mean


def delta_l(b: BoundsState, net: Network) -> tuple[dict[str, float], float]:
    """Per-line ``100 (f_pos + f_neg) / (2 F0)`` and its mean over all lines."""
    per_line = {}
    for line in net.lines:
        f_pos, f_neg = b.capacities[line.id]
        per_line[line.id] = 100.0 * (f_pos + f_neg) / (2.0 * line.capacity_mw)
    mean = math.fsum(per_line.values()) / len(per_line) if per_line else 100.0
    return per_line, mean
