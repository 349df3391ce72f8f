"""Non-dominated sorting, crowding distance and pareto-front selection.

Utilization is maximized and the remaining three objectives are minimized;
internally every comparison runs on the all-minimizing view so the dominance
test is uniform. All tie-breaks fall back to input index, which keeps every
operation deterministic for a fixed input order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import inf
from typing import Sequence

from .model import Allocation
from .objectives import ObjectiveVector


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True iff a is at least as good everywhere and strictly better somewhere."""
    ta, tb = a.as_min_tuple(), b.as_min_tuple()
    better = False
    for x, y in zip(ta, tb):
        if x > y:
            return False
        if x < y:
            better = True
    return better


@dataclass
class RankedPopulation:
    """Population members partitioned into dominance fronts with crowding."""

    members: list[tuple[Allocation, ObjectiveVector]]
    fronts: list[list[int]]
    crowding: list[float]

    def front(self, k: int) -> list[tuple[Allocation, ObjectiveVector]]:
        return [self.members[i] for i in self.fronts[k]]


def _fast_fronts(objectives: Sequence[ObjectiveVector]) -> list[list[int]]:
    """Deb-style fast non-dominated sort over the all-minimizing tuples."""
    n = len(objectives)
    mins = [o.as_min_tuple() for o in objectives]
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    for p in range(n):
        tp = mins[p]
        for q in range(p + 1, n):
            tq = mins[q]
            p_le = all(x <= y for x, y in zip(tp, tq))
            q_le = all(y <= x for x, y in zip(tp, tq))
            if p_le and tp != tq:
                dominated_by[p].append(q)
                counts[q] += 1
            elif q_le and tp != tq:
                dominated_by[q].append(p)
                counts[p] += 1
    fronts = [[i for i in range(n) if counts[i] == 0]]
    while fronts[-1]:
        nxt = []
        for p in fronts[-1]:
            for q in dominated_by[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    nxt.append(q)
        fronts.append(sorted(nxt))
    fronts.pop()
    return fronts


def crowding_distance(front: Sequence[ObjectiveVector]) -> list[float]:
    """NSGA-II crowding: boundary members per objective get +inf, interior
    members accumulate the normalized gap between their neighbours; an
    objective that is constant across the front contributes nothing."""
    n = len(front)
    if n == 0:
        return []
    if n == 1:
        return [inf]
    dist = [0.0] * n
    for axis in range(4):
        vals = [o.as_min_tuple()[axis] for o in front]
        order = sorted(range(n), key=lambda i: (vals[i], i))
        vmin, vmax = vals[order[0]], vals[order[-1]]
        if vmax == vmin:
            continue
        dist[order[0]] = inf
        dist[order[-1]] = inf
        span = vmax - vmin
        for k in range(1, n - 1):
            i = order[k]
            if dist[i] != inf:
                dist[i] += (vals[order[k + 1]] - vals[order[k - 1]]) / span
    return dist


def non_dominated_sort(
    members: Sequence[tuple[Allocation, ObjectiveVector]]
) -> RankedPopulation:
    """Rank a population into fronts and attach per-member crowding distances."""
    objectives = [obj for _, obj in members]
    fronts = _fast_fronts(objectives)
    crowding = [0.0] * len(members)
    for front in fronts:
        for i, d in zip(front, crowding_distance([objectives[i] for i in front])):
            crowding[i] = d
    return RankedPopulation(list(members), fronts, crowding)


def select_best(ranked: RankedPopulation) -> tuple[Allocation, ObjectiveVector]:
    """Front-0 member with the largest crowding distance, first index on ties."""
    if not ranked.members:
        raise ValueError("empty population")
    best = max(ranked.fronts[0], key=lambda i: (ranked.crowding[i], -i))
    return ranked.members[best]


def truncate(
    ranked: RankedPopulation, size: int
) -> list[tuple[Allocation, ObjectiveVector]]:
    """Keep the top `size` members, admitting whole fronts and filling the last
    partially-admitted front by descending crowding distance."""
    if size > len(ranked.members):
        raise ValueError(f"cannot keep {size} of {len(ranked.members)} members")
    if size == len(ranked.members):
        return list(ranked.members)
    kept: list[int] = []
    for front in ranked.fronts:
        if len(kept) + len(front) <= size:
            kept.extend(front)
            if len(kept) == size:
                break
        else:
            room = size - len(kept)
            by_crowding = sorted(front, key=lambda i: (-ranked.crowding[i], i))
            kept.extend(by_crowding[:room])
            break
    return [ranked.members[i] for i in kept]


def write_front_csv(ranked: RankedPopulation, path) -> None:
    """One row per member: dominance rank, crowding and the four objectives."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "crowding", "ru", "conflicting_pct", "comm_cost_pct", "power_w"])
        for rank, front in enumerate(ranked.fronts):
            for i in front:
                o = ranked.members[i][1]
                w.writerow([rank, ranked.crowding[i], o.ru, o.phi, o.theta, o.pw])
