"""Datacenter model: servers, VMs, users and the allocation representation.

Servers sit on a line; the distance between two servers is the absolute
difference of their integer locations (one hop between neighbours). An
allocation maps every VM to a server index, with UNPLACED marking VMs that
still await repair.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Iterable, Sequence

from .errors import AllocationError, ScenarioError

UNPLACED = -1

RESOURCES = ("pe", "cpu", "ram", "storage")


@dataclass(frozen=True)
class ServerSpec:
    """Physical server: capacities, power envelope and position on the line."""

    id: int
    pe: int
    cpu: float       # MIPS
    ram: float       # GB
    storage: float   # GB
    p_max: float     # watts at full utilization
    p_min: float     # watts floor of the linear band
    p_idle: float    # watts while active but unloaded
    location: int

    def __post_init__(self):
        if min(self.pe, self.cpu, self.ram, self.storage) <= 0:
            raise ScenarioError(f"server {self.id}: capacities must be positive")
        if not (self.p_idle <= self.p_min <= self.p_max):
            raise ScenarioError(
                f"server {self.id}: power envelope must satisfy idle <= min <= max"
            )

    def capacity(self, resource: str) -> float:
        return getattr(self, resource)


@dataclass(frozen=True)
class VmSpec:
    """Virtual machine demand vector with its owning user."""

    id: int
    pe: int
    cpu: float
    ram: float
    storage: float
    owner: int
    vm_type: str = ""

    def __post_init__(self):
        if min(self.pe, self.cpu, self.ram, self.storage) <= 0:
            raise ScenarioError(f"vm {self.id}: demands must be positive")

    def demand(self, resource: str) -> float:
        return getattr(self, resource)

    @property
    def size(self) -> float:
        """Footprint used for decreasing-size ordering and migration cost."""
        return self.cpu * self.storage


@dataclass(frozen=True)
class Datacenter:
    """Immutable problem instance: servers on a line, VMs and their owners."""

    servers: tuple[ServerSpec, ...]
    vms: tuple[VmSpec, ...]
    users: tuple[int, ...]
    proximity_limit: int = 2
    resource_set: tuple[str, ...] = ("cpu", "ram", "storage")

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(self.servers))
        object.__setattr__(self, "vms", tuple(self.vms))
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "resource_set", tuple(self.resource_set))
        ids = [s.id for s in self.servers]
        if ids != list(range(len(ids))):
            raise ScenarioError("server ids must be consecutive from 0")
        vids = [v.id for v in self.vms]
        if vids != list(range(len(vids))):
            raise ScenarioError("vm ids must be consecutive from 0")
        locs = sorted(s.location for s in self.servers)
        if len(set(locs)) != len(locs):
            raise ScenarioError("server locations must be unique")
        if locs and locs != list(range(locs[0], locs[0] + len(locs))):
            raise ScenarioError("server locations must be consecutive integers")
        known = set(self.users)
        for v in self.vms:
            if v.owner not in known:
                raise ScenarioError(f"vm {v.id}: owner {v.owner} not a known user")
        for r in self.resource_set:
            if r not in RESOURCES:
                raise ScenarioError(f"unknown resource {r!r}")

    @property
    def n_servers(self) -> int:
        return len(self.servers)

    @property
    def n_vms(self) -> int:
        return len(self.vms)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def hop_distance(self, i: int, j: int) -> int:
        return abs(self.servers[i].location - self.servers[j].location)


@dataclass(frozen=True)
class Allocation:
    """A candidate solution: psi[j] is the server id hosting vm j (or UNPLACED)."""

    psi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "psi", tuple(self.psi))

    @staticmethod
    def empty(n_vms: int) -> "Allocation":
        return Allocation((UNPLACED,) * n_vms)

    @property
    def unplaced(self) -> tuple[int, ...]:
        return tuple(j for j, s in enumerate(self.psi) if s == UNPLACED)

    @property
    def fully_placed(self) -> bool:
        return UNPLACED not in self.psi

    def by_server(self, dc: Datacenter) -> list[list[int]]:
        """VM ids grouped per server id, each group in ascending vm id order."""
        groups: list[list[int]] = [[] for _ in range(dc.n_servers)]
        for j, s in enumerate(self.psi):
            if s != UNPLACED:
                groups[s].append(j)
        return groups

    def active_servers(self, dc: Datacenter) -> list[int]:
        active = [False] * dc.n_servers
        for s in self.psi:
            if s != UNPLACED:
                active[s] = True
        return [i for i, a in enumerate(active) if a]

    def omega(self, dc: Datacenter) -> list[list[int]]:
        """P x Q mapping matrix; omega[i][j] = 1 iff vm j sits on server i."""
        m = [[0] * dc.n_vms for _ in range(dc.n_servers)]
        for j, s in enumerate(self.psi):
            if s != UNPLACED:
                m[s][j] = 1
        return m


def _check_shape(alloc: Allocation, dc: Datacenter) -> None:
    if len(alloc.psi) != dc.n_vms:
        raise AllocationError(
            f"psi has length {len(alloc.psi)}, expected {dc.n_vms}"
        )
    for j, s in enumerate(alloc.psi):
        if s != UNPLACED and not (0 <= s < dc.n_servers):
            raise AllocationError(f"vm {j} mapped to unknown server {s}")


def used_capacity(alloc: Allocation, dc: Datacenter) -> list[dict[str, float]]:
    """Per-server summed demand for every resource, over placed VMs."""
    used = [dict.fromkeys(RESOURCES, 0.0) for _ in range(dc.n_servers)]
    for j, s in enumerate(alloc.psi):
        if s == UNPLACED:
            continue
        v = dc.vms[j]
        u = used[s]
        u["pe"] += v.pe
        u["cpu"] += v.cpu
        u["ram"] += v.ram
        u["storage"] += v.storage
    return used


def capacity_respected(alloc: Allocation, dc: Datacenter) -> bool:
    """True iff no server exceeds any capacity, counting placed VMs only."""
    _check_shape(alloc, dc)
    for srv, u in zip(dc.servers, used_capacity(alloc, dc)):
        for r in RESOURCES:
            if u[r] > srv.capacity(r):
                return False
    return True


def feasible(alloc: Allocation, dc: Datacenter) -> bool:
    """Check the four capacity constraints for a fully placed allocation.

    Raises AllocationError for malformed input (wrong length, unknown server,
    or remaining UNPLACED entries); returns False only on capacity violation.
    """
    _check_shape(alloc, dc)
    if not alloc.fully_placed:
        raise AllocationError("allocation has unplaced VMs")
    return capacity_respected(alloc, dc)


def random_allocation(dc: Datacenter, rng: Random) -> Allocation:
    """Offer each VM, in random order, one uniformly random server.

    The VM is placed iff all four resource constraints hold on that server at
    that moment; otherwise it stays UNPLACED for downstream repair.
    """
    psi = [UNPLACED] * dc.n_vms
    if dc.n_servers == 0 or dc.n_vms == 0:
        return Allocation(tuple(psi))
    free = [
        {r: s.capacity(r) for r in RESOURCES} for s in dc.servers
    ]
    order = list(range(dc.n_vms))
    rng.shuffle(order)
    for j in order:
        v = dc.vms[j]
        i = rng.randrange(dc.n_servers)
        slot = free[i]
        if all(v.demand(r) <= slot[r] for r in RESOURCES):
            psi[j] = i
            for r in RESOURCES:
                slot[r] -= v.demand(r)
    return Allocation(tuple(psi))


def assignment_from_groups(groups: Sequence[Iterable[int]], n_vms: int) -> Allocation:
    """Inverse of Allocation.by_server; later duplicates of a vm id are dropped."""
    psi = [UNPLACED] * n_vms
    for server, members in enumerate(groups):
        for j in members:
            if psi[j] == UNPLACED:
                psi[j] = server
    return Allocation(tuple(psi))
