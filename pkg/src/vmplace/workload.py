"""Experiment inputs: built-in hardware catalogs, synthetic scenarios and
utilization traces.

The default catalog carries three heterogeneous server models and four VM
sizes. Scenario generation follows the bag-of-tasks convention: every user
owns between 1 and 10 VMs, drawn so the requested total is met exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from random import Random

from .errors import ScenarioError, TraceError
from .model import Allocation, Datacenter, ServerSpec, VmSpec


@dataclass(frozen=True)
class ServerModel:
    name: str
    pe: int
    cpu: float
    ram: float
    storage: float
    p_max: float
    p_min: float
    p_idle: float


@dataclass(frozen=True)
class VmModel:
    name: str
    pe: int
    cpu: float
    ram: float
    storage: float


@dataclass(frozen=True)
class Catalog:
    """Hardware menu used to instantiate datacenters."""

    servers: tuple[ServerModel, ...]
    vm_types: tuple[VmModel, ...]

    @staticmethod
    def default() -> "Catalog":
        return Catalog(
            servers=(
                ServerModel("ProLiantM110G5XEON3075", 2, 2660, 4, 160, 135, 93.7, 93.7),
                ServerModel("IBMX3250Xeonx3480", 4, 3067, 8, 250, 113, 42.3, 42.3),
                ServerModel("IBM3550Xeonx5675", 12, 3067, 16, 500, 222, 58.4, 58.4),
            ),
            vm_types=(
                VmModel("S", 1, 500, 0.5, 40),
                VmModel("M", 2, 1000, 1, 60),
                VmModel("L", 3, 1500, 2, 80),
                VmModel("XL", 4, 2000, 3, 100),
            ),
        )

    @staticmethod
    def from_json(path) -> "Catalog":
        with open(path) as fh:
            raw = json.load(fh)
        try:
            servers = tuple(ServerModel(**entry) for entry in raw["servers"])
            vm_types = tuple(VmModel(**entry) for entry in raw["vm_types"])
        except (KeyError, TypeError) as exc:
            raise ScenarioError(f"malformed catalog file {path}: {exc}") from exc
        if not servers or not vm_types:
            raise ScenarioError("catalog needs at least one server and one vm type")
        return Catalog(servers, vm_types)

    def largest_server(self) -> ServerModel:
        """Biggest model by summed share of the per-resource maxima."""
        def bulk(m: ServerModel) -> float:
            return sum(
                getattr(m, r) / max(getattr(o, r) for o in self.servers)
                for r in ("pe", "cpu", "ram", "storage")
            )
        return max(self.servers, key=lambda m: (bulk(m), m.name))


def _bag_sizes(n_vms: int, n_users: int, rng: Random) -> list[int]:
    """Per-user task counts in [1, 10] whose total is exactly n_vms."""
    sizes = []
    remaining = n_vms
    for left in range(n_users, 0, -1):
        low = max(1, remaining - 10 * (left - 1))
        high = min(10, remaining - (left - 1))
        size = rng.randint(low, high)
        sizes.append(size)
        remaining -= size
    return sizes


def build_servers(n_servers: int, catalog: Catalog) -> list[ServerSpec]:
    """Even split across catalog models, remainder on the largest model,
    laid out round-robin along the line."""
    k = len(catalog.servers)
    counts = {m.name: n_servers // k for m in catalog.servers}
    counts[catalog.largest_server().name] += n_servers % k
    servers = []
    cycle = 0
    while len(servers) < n_servers:
        model = catalog.servers[cycle % k]
        cycle += 1
        if counts[model.name] == 0:
            continue
        counts[model.name] -= 1
        i = len(servers)
        servers.append(
            ServerSpec(
                id=i,
                pe=model.pe,
                cpu=model.cpu,
                ram=model.ram,
                storage=model.storage,
                p_max=model.p_max,
                p_min=model.p_min,
                p_idle=model.p_idle,
                location=i,
            )
        )
    return servers


def generate_scenario(
    n_vms: int,
    n_servers: int,
    n_users: int,
    rng: Random,
    catalog: Catalog | None = None,
) -> Datacenter:
    """Random datacenter instance: users get 1-10 VMs each, VM sizes drawn
    uniformly from the catalog, servers split evenly across models.

    Raises ScenarioError if the user/VM counts are inconsistent, and
    InfeasibleError if the generated VMs cannot all be packed.
    """
    if n_users < 1 or n_servers < 1:
        raise ScenarioError("need at least one user and one server")
    if not (n_users <= n_vms <= 10 * n_users):
        raise ScenarioError(
            f"{n_vms} VMs cannot be split over {n_users} users with 1-10 tasks each"
        )
    catalog = catalog or Catalog.default()
    servers = build_servers(n_servers, catalog)
    sizes = _bag_sizes(n_vms, n_users, rng)
    vms = []
    for user, size in enumerate(sizes):
        for _ in range(size):
            model = catalog.vm_types[rng.randrange(len(catalog.vm_types))]
            vms.append(
                VmSpec(
                    id=len(vms),
                    pe=model.pe,
                    cpu=model.cpu,
                    ram=model.ram,
                    storage=model.storage,
                    owner=user,
                    vm_type=model.name,
                )
            )
    dc = Datacenter(tuple(servers), tuple(vms), tuple(range(n_users)))
    from .woga import ffd_repair  # placed here to avoid a cycle at import time

    ffd_repair(Allocation.empty(dc.n_vms), dc)  # request must fit the datacenter
    return dc


def dump_scenario(dc: Datacenter, path) -> None:
    """Round-trippable JSON snapshot for exact reruns."""
    payload = {
        "proximity_limit": dc.proximity_limit,
        "resource_set": list(dc.resource_set),
        "users": list(dc.users),
        "servers": [
            {
                "id": s.id, "pe": s.pe, "cpu": s.cpu, "ram": s.ram,
                "storage": s.storage, "p_max": s.p_max, "p_min": s.p_min,
                "p_idle": s.p_idle, "location": s.location,
            }
            for s in dc.servers
        ],
        "vms": [
            {
                "id": v.id, "pe": v.pe, "cpu": v.cpu, "ram": v.ram,
                "storage": v.storage, "owner": v.owner, "vm_type": v.vm_type,
            }
            for v in dc.vms
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)


def load_scenario(path) -> Datacenter:
    with open(path) as fh:
        raw = json.load(fh)
    try:
        return Datacenter(
            servers=tuple(ServerSpec(**s) for s in raw["servers"]),
            vms=tuple(VmSpec(**v) for v in raw["vms"]),
            users=tuple(raw["users"]),
            proximity_limit=raw.get("proximity_limit", 2),
            resource_set=tuple(raw.get("resource_set", ("cpu", "ram", "storage"))),
        )
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario file {path}: {exc}") from exc


EVENTS = ("arrive", "depart", "none")


@dataclass(frozen=True)
class TraceEpoch:
    """One reporting interval: per-VM utilization percentages plus events."""

    index: int
    arrivals: tuple[int, ...]
    departures: tuple[int, ...]
    usage: dict[int, tuple[float, float]]   # vm id -> (cpu %, mem %)


def load_trace(path) -> list[TraceEpoch]:
    """Parse the epoch,vm_id,cpu_pct,mem_pct,event CSV into epochs.

    Epoch indices must be non-decreasing; utilization must lie in [0, 100].
    Errors carry the offending line number.
    """
    epochs: list[TraceEpoch] = []
    current: dict | None = None
    last_epoch = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (lineno == 1 and row[0] == "epoch"):
                continue
            if len(row) != 5:
                raise TraceError(f"{path}:{lineno}: expected 5 columns, got {len(row)}")
            try:
                epoch, vm_id = int(row[0]), int(row[1])
                cpu_pct, mem_pct = float(row[2]), float(row[3])
            except ValueError as exc:
                raise TraceError(f"{path}:{lineno}: {exc}") from exc
            event = row[4].strip()
            if event not in EVENTS:
                raise TraceError(f"{path}:{lineno}: unknown event {event!r}")
            if not (0.0 <= cpu_pct <= 100.0) or not (0.0 <= mem_pct <= 100.0):
                raise TraceError(f"{path}:{lineno}: utilization out of [0, 100]")
            if last_epoch is not None and epoch < last_epoch:
                raise TraceError(f"{path}:{lineno}: epochs must be non-decreasing")
            if current is None or epoch != current["index"]:
                if current is not None:
                    epochs.append(_freeze_epoch(current))
                current = {"index": epoch, "arrivals": [], "departures": [], "usage": {}}
            last_epoch = epoch
            if event == "arrive":
                current["arrivals"].append(vm_id)
            elif event == "depart":
                current["departures"].append(vm_id)
            current["usage"][vm_id] = (cpu_pct, mem_pct)
    if current is not None:
        epochs.append(_freeze_epoch(current))
    return epochs


def _freeze_epoch(raw: dict) -> TraceEpoch:
    return TraceEpoch(
        index=raw["index"],
        arrivals=tuple(raw["arrivals"]),
        departures=tuple(raw["departures"]),
        usage=dict(raw["usage"]),
    )


def save_trace(epochs: list[TraceEpoch], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "vm_id", "cpu_pct", "mem_pct", "event"])
        for ep in epochs:
            arrivals, departures = set(ep.arrivals), set(ep.departures)
            for vm_id in ep.usage:
                event = (
                    "arrive" if vm_id in arrivals
                    else "depart" if vm_id in departures
                    else "none"
                )
                w.writerow([ep.index, vm_id, ep.usage[vm_id][0], ep.usage[vm_id][1], event])


def generate_trace(
    dc: Datacenter,
    n_epochs: int,
    rng: Random,
    initial_fraction: float = 0.5,
) -> list[TraceEpoch]:
    """Synthetic utilization trace: a share of VMs arrive at epoch 0, the
    rest stagger in over the first half of the run, and each departs after a
    random lifetime. Utilization wanders uniformly between 20% and 95%."""
    if n_epochs < 1:
        raise TraceError("need at least one epoch")
    arrival = {}
    departure = {}
    for v in dc.vms:
        if rng.random() < initial_fraction:
            arrival[v.id] = 0
        else:
            arrival[v.id] = rng.randint(0, max(0, n_epochs // 2 - 1))
        lifetime = rng.randint(max(1, n_epochs // 4), n_epochs)
        departure[v.id] = arrival[v.id] + lifetime
    epochs = []
    for t in range(n_epochs):
        arrivals: list[int] = []
        departures: list[int] = []
        usage: dict[int, tuple[float, float]] = {}
        for v in dc.vms:
            a, d = arrival[v.id], departure[v.id]
            if a == t:
                arrivals.append(v.id)
                usage[v.id] = (
                    round(rng.uniform(20.0, 95.0), 2),
                    round(rng.uniform(20.0, 95.0), 2),
                )
            elif a < t < d:
                usage[v.id] = (
                    round(rng.uniform(20.0, 95.0), 2),
                    round(rng.uniform(20.0, 95.0), 2),
                )
            elif a < t == d:
                departures.append(v.id)
                usage[v.id] = (0.0, 0.0)
        epochs.append(TraceEpoch(t, tuple(arrivals), tuple(departures), usage))
    return epochs
