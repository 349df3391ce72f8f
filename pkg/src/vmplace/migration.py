"""Dynamic placement: epoch-by-epoch arrivals, departures, watermark-driven
migrations and migration-cost accounting.

Migrating a VM costs its hop distance times its cpu*storage footprint, plus a
fixed state-transition energy for every server woken from idle. Destination
choice depends on whether the VM is compute- or data-sensitive: the former
favours the first active server with room, the latter stays close to the
owner's other VMs; both wake the largest sleeping server only as a last
resort.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

from .errors import InfeasibleError
from .model import RESOURCES, UNPLACED, Allocation, Datacenter, VmSpec
from .objectives import ObjectiveVector, evaluate, server_utilization
from .woga import WogaParams, optimize

ACTIVATION_ENERGY_J = 4260.0


class Sensitivity(Enum):
    COMPUTE_SENSITIVE = "compute"
    DATA_SENSITIVE = "data"


@dataclass(frozen=True)
class MigrationEvent:
    """One VM move; `activated_server` marks a destination woken from idle."""

    vm_id: int
    source: int
    destination: int
    hops: int
    vm_size: float
    activated_server: bool

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("migration must change servers")
        if self.hops < 0 or self.vm_size <= 0:
            raise ValueError("hops must be >= 0 and vm_size positive")


@dataclass(frozen=True)
class EpochReport:
    """Per-epoch outcome row."""

    epoch: int
    objectives: ObjectiveVector
    migrations: int
    migration_cost: float
    network_cost: float
    activation_cost: float
    active_servers: int
    events: tuple[MigrationEvent, ...] = ()


def classify(vm: VmSpec, dc: Datacenter) -> Sensitivity:
    """Compute-sensitive iff normalized CPU demand >= normalized memory demand.

    Raw MIPS and GB are incomparable, so both demands are scaled by the
    largest respective server capacity before the comparison.
    """
    cpu_norm = vm.cpu / max(s.cpu for s in dc.servers)
    mem_norm = vm.storage / max(s.storage for s in dc.servers)
    if cpu_norm >= mem_norm:
        return Sensitivity.COMPUTE_SENSITIVE
    return Sensitivity.DATA_SENSITIVE


def _free_capacity(alloc: Allocation, dc: Datacenter) -> list[dict[str, float]]:
    free = [{r: s.capacity(r) for r in RESOURCES} for s in dc.servers]
    for j, s in enumerate(alloc.psi):
        if s != UNPLACED:
            v = dc.vms[j]
            for r in RESOURCES:
                free[s][r] -= v.demand(r)
    return free


def _capacity_rank(dc: Datacenter, server: int) -> float:
    caps = {r: max(s.capacity(r) for s in dc.servers) for r in RESOURCES}
    return sum(dc.servers[server].capacity(r) / caps[r] for r in RESOURCES)


def select_destination(
    vm_id: int,
    source: int,
    alloc: Allocation,
    dc: Datacenter,
    allow_activation: bool = True,
) -> int:
    """Pick where the VM on `source` should move.

    Active servers are tried first. Compute-sensitive VMs take the first
    fitting active server by location; data-sensitive VMs take the fitting
    active server closest to the centroid of the owner's other VMs. If no
    active server fits and activation is allowed, the largest-capacity
    sleeping server that fits is woken. Raises InfeasibleError otherwise.
    """
    vm = dc.vms[vm_id]
    free = _free_capacity(alloc, dc)
    active = set(alloc.active_servers(dc))

    def fits(i: int) -> bool:
        return all(vm.demand(r) <= free[i][r] for r in RESOURCES)

    candidates = [
        i for i in range(dc.n_servers)
        if i in active and i != source and fits(i)
    ]
    if candidates:
        if classify(vm, dc) is Sensitivity.COMPUTE_SENSITIVE:
            return min(candidates, key=lambda i: dc.servers[i].location)
        sibling_locs = [
            dc.servers[s].location
            for j, s in enumerate(alloc.psi)
            if s != UNPLACED and j != vm_id and dc.vms[j].owner == vm.owner
        ]
        centroid = (
            sum(sibling_locs) / len(sibling_locs)
            if sibling_locs
            else dc.servers[source].location
        )
        return min(
            candidates,
            key=lambda i: (abs(dc.servers[i].location - centroid), dc.servers[i].location),
        )
    if allow_activation:
        sleeping = [
            i for i in range(dc.n_servers)
            if i not in active and i != source and fits(i)
        ]
        if sleeping:
            return max(
                sleeping,
                key=lambda i: (_capacity_rank(dc, i), -dc.servers[i].location),
            )
    raise InfeasibleError(f"vm {vm_id} has no migration destination")


def migration_cost(events) -> float:
    """Hop-weighted data volume plus wake-up energy for newly active servers."""
    network = sum(e.hops * e.vm_size for e in events)
    woken = {e.destination for e in events if e.activated_server}
    return network + ACTIVATION_ENERGY_J * len(woken)


def migration_cost_breakdown(events) -> tuple[float, float, float]:
    """(network term, activation term, their raw sum); the two terms carry
    different units, so reports keep them separate as well as summed."""
    network = sum(e.hops * e.vm_size for e in events)
    woken = {e.destination for e in events if e.activated_server}
    activation = ACTIVATION_ENERGY_J * len(woken)
    return network, activation, network + activation


def _live_datacenter(dc: Datacenter, live_ids: list[int]) -> tuple[Datacenter, dict[int, int]]:
    """Sub-instance over the live VMs, reindexed; returns (dc, old->new map)."""
    index = {vm_id: k for k, vm_id in enumerate(live_ids)}
    vms = tuple(
        dataclasses.replace(dc.vms[vm_id], id=index[vm_id]) for vm_id in live_ids
    )
    sub = Datacenter(
        servers=dc.servers,
        vms=vms,
        users=dc.users,
        proximity_limit=dc.proximity_limit,
        resource_set=dc.resource_set,
    )
    return sub, index


def run_dynamic(
    dc: Datacenter,
    trace,
    params: WogaParams,
    low_watermark: float = 0.2,
    high_watermark: float = 0.9,
    on_epoch=None,
) -> list[EpochReport]:
    """Drive the placement through a utilization trace.

    Per epoch: departures free their servers; overloaded servers shed their
    smallest VMs until every monitored resource is back under the high
    watermark; servers idling below the low watermark are drained onto other
    active servers (never waking one for this) and shut down; arrivals are
    placed by the optimizer warm-started from the incumbent placement, and
    any incumbent VM it relocates counts as a migration.
    """
    placement: dict[int, int] = {}
    usage_pct: dict[int, tuple[float, float]] = {}
    reports: list[EpochReport] = []

    for ep in trace:
        events: list[MigrationEvent] = []

        for vm_id in ep.departures:
            placement.pop(vm_id, None)
            usage_pct.pop(vm_id, None)
        for vm_id, u in ep.usage.items():
            if vm_id in placement:
                usage_pct[vm_id] = u

        if placement:
            events.extend(
                _relieve_overloads(dc, placement, usage_pct, high_watermark)
            )
            events.extend(
                _drain_underloads(dc, placement, usage_pct, low_watermark)
            )

        if ep.arrivals:
            for vm_id in ep.arrivals:
                usage_pct[vm_id] = ep.usage.get(vm_id, (100.0, 100.0))
            events.extend(
                _place_arrivals(dc, placement, list(ep.arrivals), params, ep.index)
            )

        live_ids = sorted(placement)
        alloc_full = _full_allocation(dc, placement)
        assert _capacity_ok(alloc_full, dc), "constraint violated after epoch moves"

        if live_ids:
            sub, index = _live_datacenter(dc, live_ids)
            sub_alloc = Allocation(tuple(placement[v] for v in live_ids))
            usage = {
                index[v]: (usage_pct[v][0] / 100.0, usage_pct[v][1] / 100.0)
                for v in live_ids
            }
            objectives = evaluate(sub_alloc, sub, usage)
            active = len(sub_alloc.active_servers(sub))
        else:
            objectives = ObjectiveVector(0.0, 0.0, 0.0, 0.0)
            active = 0

        network, activation, total = migration_cost_breakdown(events)
        report = EpochReport(
            epoch=ep.index,
            objectives=objectives,
            migrations=len(events),
            migration_cost=total,
            network_cost=network,
            activation_cost=activation,
            active_servers=active,
            events=tuple(events),
        )
        reports.append(report)
        if on_epoch is not None:
            on_epoch(report)
    return reports


def _full_allocation(dc: Datacenter, placement: dict[int, int]) -> Allocation:
    psi = [UNPLACED] * dc.n_vms
    for vm_id, server in placement.items():
        psi[vm_id] = server
    return Allocation(tuple(psi))


def _capacity_ok(alloc: Allocation, dc: Datacenter) -> bool:
    from .model import capacity_respected

    return capacity_respected(alloc, dc)


def _fractions(dc, placement, usage_pct, server):
    alloc = _full_allocation(dc, placement)
    usage = {v: (u[0] / 100.0, u[1] / 100.0) for v, u in usage_pct.items()}
    return server_utilization(alloc, dc, server, usage)


def _move(dc, placement, vm_id, destination, active_before) -> MigrationEvent:
    source = placement[vm_id]
    event = MigrationEvent(
        vm_id=vm_id,
        source=source,
        destination=destination,
        hops=dc.hop_distance(source, destination),
        vm_size=dc.vms[vm_id].size,
        activated_server=destination not in active_before,
    )
    placement[vm_id] = destination
    return event


def _relieve_overloads(dc, placement, usage_pct, high) -> list[MigrationEvent]:
    """Shed smallest VMs from servers running any resource above the high
    watermark until they are back within it (or nothing else can move)."""
    events: list[MigrationEvent] = []
    servers = sorted(set(placement.values()), key=lambda i: dc.servers[i].location)
    for server in servers:
        while True:
            hosted = sorted(
                (v for v, s in placement.items() if s == server),
                key=lambda v: (dc.vms[v].size, v),
            )
            if not hosted:
                break
            fr = _fractions(dc, placement, usage_pct, server)
            if max(fr.values()) <= high:
                break
            alloc = _full_allocation(dc, placement)
            active_before = set(alloc.active_servers(dc))
            moved = False
            for vm_id in hosted:
                try:
                    dest = select_destination(vm_id, server, alloc, dc)
                except InfeasibleError:
                    continue
                events.append(_move(dc, placement, vm_id, dest, active_before))
                moved = True
                break
            if not moved:
                break
    return events


def _drain_underloads(dc, placement, usage_pct, low) -> list[MigrationEvent]:
    """Empty servers whose mean utilization sits below the low watermark.

    The drain goes to already-active servers only; if any hosted VM has no
    such destination the server is left untouched."""
    events: list[MigrationEvent] = []
    servers = sorted(set(placement.values()), key=lambda i: dc.servers[i].location)
    for server in servers:
        hosted = sorted(
            (v for v, s in placement.items() if s == server),
            key=lambda v: (dc.vms[v].size, v),
        )
        if not hosted:
            continue
        fr = _fractions(dc, placement, usage_pct, server)
        if sum(fr.values()) / len(fr) >= low:
            continue
        trial = dict(placement)
        moves: list[tuple[int, int]] = []
        ok = True
        for vm_id in hosted:
            alloc = _full_allocation(dc, trial)
            try:
                dest = select_destination(vm_id, server, alloc, dc, allow_activation=False)
            except InfeasibleError:
                ok = False
                break
            trial[vm_id] = dest
            moves.append((vm_id, dest))
        if not ok:
            continue
        alloc = _full_allocation(dc, placement)
        active_before = set(alloc.active_servers(dc))
        for vm_id, dest in moves:
            events.append(_move(dc, placement, vm_id, dest, active_before))
    return events


def _place_arrivals(dc, placement, arrivals, params, epoch_index) -> list[MigrationEvent]:
    """Warm-started re-optimization over the live VMs; relocations of
    previously placed VMs are charged as migrations."""
    live_ids = sorted(set(placement) | set(arrivals))
    sub, index = _live_datacenter(dc, live_ids)
    incumbent = [UNPLACED] * len(live_ids)
    for vm_id, server in placement.items():
        incumbent[index[vm_id]] = server
    epoch_params = dataclasses.replace(
        params, seed=params.seed * 100003 + epoch_index
    )
    front = optimize(
        sub,
        epoch_params,
        seed_allocations=[Allocation(tuple(incumbent))],
    )
    chosen, _ = front.best()

    pre_alloc = _full_allocation(dc, placement)
    active_before = set(pre_alloc.active_servers(dc))
    events: list[MigrationEvent] = []
    woken: set[int] = set()
    for vm_id in live_ids:
        new_server = chosen.psi[index[vm_id]]
        if vm_id in placement and placement[vm_id] != new_server:
            activated = new_server not in active_before and new_server not in woken
            if activated:
                woken.add(new_server)
            source = placement[vm_id]
            events.append(
                MigrationEvent(
                    vm_id=vm_id,
                    source=source,
                    destination=new_server,
                    hops=dc.hop_distance(source, new_server),
                    vm_size=dc.vms[vm_id].size,
                    activated_server=activated,
                )
            )
        placement[vm_id] = new_server
    return events
