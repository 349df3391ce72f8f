"""The four placement objectives and their datacenter-level aggregates.

All functions are pure: given the same allocation and datacenter they return
the same numbers, so population members can be evaluated in any order.
Utilization and power honour the datacenter's configurable resource set;
conflict and communication metrics depend only on ownership and locations.

An optional ``usage`` map scales cpu/storage demands per VM (fractions in
[0, 1]) so dynamic runs can report actual rather than requested utilization.
Placement constraints always use the nominal demands.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AllocationError
from .model import Allocation, Datacenter, UNPLACED


@dataclass(frozen=True)
class ObjectiveVector:
    """Fitness of an allocation: utilization up, the other three down."""

    ru: float       # datacenter resource utilization, fraction in [0, 1]
    phi: float      # conflicting servers, percent
    theta: float    # far-flung users (communication cost), percent
    pw: float       # power draw, watts (or watt-intervals once aggregated)

    def as_min_tuple(self) -> tuple[float, float, float, float]:
        """All-minimizing view used by dominance comparisons."""
        return (-self.ru, self.phi, self.theta, self.pw)

    def scaled(self, dt: float) -> "ObjectiveVector":
        return ObjectiveVector(self.ru * dt, self.phi * dt, self.theta * dt, self.pw * dt)


@dataclass(frozen=True)
class EpochSeries:
    """Per-epoch objective samples with durations; sums approximate time integrals."""

    samples: tuple[ObjectiveVector, ...]
    durations: tuple[float, ...]

    def __post_init__(self):
        if len(self.samples) != len(self.durations):
            raise ValueError("samples and durations must align")

    def aggregate(self) -> ObjectiveVector:
        """Discrete time integral: sum of sample * duration over epochs."""
        ru = phi = theta = pw = 0.0
        for s, dt in zip(self.samples, self.durations):
            ru += s.ru * dt
            phi += s.phi * dt
            theta += s.theta * dt
            pw += s.pw * dt
        return ObjectiveVector(ru, phi, theta, pw)

    def time_average(self) -> ObjectiveVector:
        total = sum(self.durations)
        if total == 0:
            return ObjectiveVector(0.0, 0.0, 0.0, 0.0)
        return self.aggregate().scaled(1.0 / total)


def _effective_demand(vm, resource: str, usage) -> float:
    d = vm.demand(resource)
    if usage is None:
        return d
    f = usage.get(vm.id)
    if f is None:
        return d
    if resource == "cpu":
        return d * f[0]
    if resource == "storage":
        return d * f[1]
    return d


def server_utilization(
    alloc: Allocation, dc: Datacenter, server_id: int, usage=None
) -> dict[str, float]:
    """Per-resource utilization fractions of one server over the resource set."""
    if not (0 <= server_id < dc.n_servers):
        raise AllocationError(f"server {server_id} out of range")
    srv = dc.servers[server_id]
    sums = dict.fromkeys(dc.resource_set, 0.0)
    for j, s in enumerate(alloc.psi):
        if s == server_id:
            v = dc.vms[j]
            for r in dc.resource_set:
                sums[r] += _effective_demand(v, r, usage)
    return {r: sums[r] / srv.capacity(r) for r in dc.resource_set}


def _per_server_fractions(alloc, dc, usage) -> tuple[list[dict[str, float]], list[bool]]:
    sums = [dict.fromkeys(dc.resource_set, 0.0) for _ in range(dc.n_servers)]
    active = [False] * dc.n_servers
    for j, s in enumerate(alloc.psi):
        if s == UNPLACED:
            raise AllocationError("cannot evaluate an allocation with unplaced VMs")
        v = dc.vms[j]
        active[s] = True
        acc = sums[s]
        for r in dc.resource_set:
            acc[r] += _effective_demand(v, r, usage)
    fractions = [
        {r: sums[i][r] / dc.servers[i].capacity(r) for r in dc.resource_set}
        for i in range(dc.n_servers)
    ]
    return fractions, active


def ru_datacenter(alloc: Allocation, dc: Datacenter, usage=None) -> float:
    """Mean utilization fraction over active servers and the resource set."""
    fractions, active = _per_server_fractions(alloc, dc, usage)
    n_active = sum(active)
    if n_active == 0:
        return 0.0
    total = 0.0
    for i in range(dc.n_servers):
        if active[i]:
            total += sum(fractions[i][r] for r in dc.resource_set)
    return total / (len(dc.resource_set) * n_active)


def conflicting_servers(alloc: Allocation, dc: Datacenter) -> float:
    """Percent of all servers hosting VMs of two or more distinct users."""
    if dc.n_servers == 0:
        return 0.0
    owners: list[set[int]] = [set() for _ in range(dc.n_servers)]
    for j, s in enumerate(alloc.psi):
        if s != UNPLACED:
            owners[s].add(dc.vms[j].owner)
    conflicted = sum(1 for o in owners if len(o) >= 2)
    return 100.0 * conflicted / dc.n_servers


def communication_cost(alloc: Allocation, dc: Datacenter) -> float:
    """Percent of users whose servers span at least the proximity limit.

    A user's span is the widest hop distance between any two servers hosting
    that user's VMs (zero when they share a single server).
    """
    if dc.n_users == 0:
        return 0.0
    lo: dict[int, int] = {}
    hi: dict[int, int] = {}
    for j, s in enumerate(alloc.psi):
        if s == UNPLACED:
            continue
        owner = dc.vms[j].owner
        loc = dc.servers[s].location
        if owner not in lo:
            lo[owner] = hi[owner] = loc
        else:
            lo[owner] = min(lo[owner], loc)
            hi[owner] = max(hi[owner], loc)
    far = sum(1 for k in lo if hi[k] - lo[k] >= dc.proximity_limit)
    return 100.0 * far / dc.n_users


def server_power(srv, utilization: float) -> float:
    """Linear power model between the idle floor and the full-load peak."""
    return (srv.p_max - srv.p_min) * utilization + srv.p_idle


def power(alloc: Allocation, dc: Datacenter, usage=None) -> float:
    """Total watts over active servers; inactive servers draw nothing."""
    fractions, active = _per_server_fractions(alloc, dc, usage)
    total = 0.0
    n = len(dc.resource_set)
    for i, srv in enumerate(dc.servers):
        if not active[i]:
            continue
        ru_i = sum(fractions[i].values()) / n
        total += server_power(srv, ru_i)
    return total


def evaluate(alloc: Allocation, dc: Datacenter, usage=None) -> ObjectiveVector:
    """All four objectives in a single pass over the assignment vector.

    Raises AllocationError on partial allocations and AssertionError if the
    allocation violates a capacity constraint: nothing infeasible may ever
    reach scoring. Matches the standalone per-objective functions exactly.
    """
    P, rs = dc.n_servers, dc.resource_set
    if len(alloc.psi) != dc.n_vms:
        raise AllocationError(f"psi has length {len(alloc.psi)}, expected {dc.n_vms}")
    sums = [dict.fromkeys(("pe", "cpu", "ram", "storage"), 0.0) for _ in range(P)]
    owners: list[set[int]] = [set() for _ in range(P)]
    lo: dict[int, int] = {}
    hi: dict[int, int] = {}
    for j, s in enumerate(alloc.psi):
        if s == UNPLACED:
            raise AllocationError("cannot evaluate an allocation with unplaced VMs")
        if not (0 <= s < P):
            raise AllocationError(f"vm {j} mapped to unknown server {s}")
        v = dc.vms[j]
        acc = sums[s]
        acc["pe"] += v.pe
        acc["cpu"] += v.cpu
        acc["ram"] += v.ram
        acc["storage"] += v.storage
        owners[s].add(v.owner)
        loc = dc.servers[s].location
        if v.owner not in lo:
            lo[v.owner] = hi[v.owner] = loc
        else:
            lo[v.owner] = min(lo[v.owner], loc)
            hi[v.owner] = max(hi[v.owner], loc)

    ru_total = 0.0
    pw_total = 0.0
    n_active = 0
    for i, srv in enumerate(dc.servers):
        acc = sums[i]
        for r in ("pe", "cpu", "ram", "storage"):
            if acc[r] > srv.capacity(r):
                raise AssertionError("attempted to evaluate an infeasible allocation")
        if not owners[i]:
            continue
        n_active += 1
        if usage is None:
            mean_frac = sum(acc[r] / srv.capacity(r) for r in rs) / len(rs)
            ru_total += sum(acc[r] / srv.capacity(r) for r in rs)
        else:
            fr = server_utilization(alloc, dc, i, usage)
            mean_frac = sum(fr.values()) / len(rs)
            ru_total += sum(fr.values())
        pw_total += server_power(srv, mean_frac)

    ru = ru_total / (len(rs) * n_active) if n_active else 0.0
    phi = 100.0 * sum(1 for o in owners if len(o) >= 2) / P if P else 0.0
    theta = (
        100.0 * sum(1 for k in lo if hi[k] - lo[k] >= dc.proximity_limit) / dc.n_users
        if dc.n_users
        else 0.0
    )
    return ObjectiveVector(ru=ru, phi=phi, theta=theta, pw=pw_total)
