"""Whale-and-genetic hybrid search over VM placements.

A placement is encoded, server by server, as a probability of resembling a
reference placement; whale moves shift the encoded vector toward the best
(or a random) member and the result is decoded back into a placement. A
first-fit-decreasing pass repairs any VM left out by decoding, crossover
recombines server segments, and mutation swaps the loads of two servers.
Selection is pareto-based with crowding-distance truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, floor
from random import Random

from .errors import InfeasibleError, ScenarioError
from .model import (
    RESOURCES,
    UNPLACED,
    Allocation,
    Datacenter,
    assignment_from_groups,
    random_allocation,
)
from .objectives import ObjectiveVector, evaluate
from .pareto import dominates, non_dominated_sort, select_best, truncate


@dataclass(frozen=True)
class WhaleVector:
    """Per-server similarity probabilities of a placement to a reference."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if any(not (0.0 <= v <= 1.0) for v in self.values):
            raise ValueError("whale vector values must lie in [0, 1]")


@dataclass(frozen=True)
class WogaParams:
    """Search knobs; defaults are sized for desk-scale experiments."""

    population_size: int = 20
    max_iterations: int = 100
    stall_limit: int = 15
    mutation_rate: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ScenarioError("population_size must be at least 2")
        if self.max_iterations < 1:
            raise ScenarioError("max_iterations must be at least 1")
        if not (0.0 <= self.mutation_rate <= 1.0):
            raise ScenarioError("mutation_rate must lie in [0, 1]")


@dataclass
class GenerationStats:
    """Telemetry row emitted once per generation."""

    generation: int
    best: ObjectiveVector
    front_size: int
    repairs: int


@dataclass
class ParetoFront:
    """Final non-dominated solutions plus the per-generation history."""

    solutions: list[tuple[Allocation, ObjectiveVector]]
    history: list[GenerationStats] = field(default_factory=list)
    generations: int = 0

    def best(self) -> tuple[Allocation, ObjectiveVector]:
        return select_best(non_dominated_sort(self.solutions))


def encode(current: Allocation, reference: Allocation, dc: Datacenter) -> WhaleVector:
    """Similarity of each server's load in `current` to the same server in
    `reference`, judged on VM count and VM types.

    Exact match of count and types scores 1; matching types at 1/k of the
    reference count score 1/k; equal counts with partially mismatched types
    score the matching fraction; an empty server in either placement scores 0
    unless both are empty. All cases reduce to the shared-type multiset size
    divided by the larger VM count.
    """
    cur_groups = current.by_server(dc)
    ref_groups = reference.by_server(dc)
    values = []
    for cur, ref in zip(cur_groups, ref_groups):
        if not cur and not ref:
            values.append(1.0)
            continue
        if not cur or not ref:
            values.append(0.0)
            continue
        cur_types: dict[str, int] = {}
        for j in cur:
            t = dc.vms[j].vm_type
            cur_types[t] = cur_types.get(t, 0) + 1
        shared = 0
        for j in ref:
            t = dc.vms[j].vm_type
            if cur_types.get(t, 0) > 0:
                cur_types[t] -= 1
                shared += 1
        values.append(shared / max(len(cur), len(ref)))
    return WhaleVector(tuple(values))


def decode(
    updated: WhaleVector,
    reference: Allocation,
    current: Allocation,
    dc: Datacenter,
) -> Allocation:
    """Turn an updated probability vector back into a (possibly partial)
    placement.

    Per server, the blend of reference and current VMs follows the value:
    1 copies the reference load verbatim; >= 0.75 keeps one current VM and
    fills from the reference; >= 0.50 takes the first half from the reference
    and the trailing half of the current load; > 0.25 keeps three quarters of
    the current load plus a quarter from the reference; anything lower copies
    the current load. Reference shares round up, current shares round down.
    A VM claimed by an earlier server is skipped, as is any VM that would
    overflow the server; whatever remains unclaimed stays UNPLACED.
    """
    if len(updated.values) != dc.n_servers:
        raise ValueError("whale vector length must equal the server count")
    cur_groups = current.by_server(dc)
    ref_groups = reference.by_server(dc)
    psi = [UNPLACED] * dc.n_vms
    free = [{r: s.capacity(r) for r in RESOURCES} for s in dc.servers]
    for i, value in enumerate(updated.values):
        cur, ref = cur_groups[i], ref_groups[i]
        if value >= 1.0:
            pool = list(ref)
        elif value >= 0.75:
            pool = cur[:1] + ref
        elif value >= 0.50:
            pool = ref[: ceil(len(ref) / 2)] + cur[len(cur) - floor(len(cur) / 2):]
        elif value > 0.25:
            pool = cur[: floor(0.75 * len(cur))] + ref[: ceil(0.25 * len(ref))]
        else:
            pool = list(cur)
        slot = free[i]
        for j in pool:
            if psi[j] != UNPLACED:
                continue
            v = dc.vms[j]
            if all(v.demand(r) <= slot[r] for r in RESOURCES):
                psi[j] = i
                for r in RESOURCES:
                    slot[r] -= v.demand(r)
    return Allocation(tuple(psi))


def whale_step(
    current: Allocation,
    best: Allocation,
    population: list[Allocation],
    dc: Datacenter,
    params: WogaParams,
    generation: int,
    rng: Random,
) -> Allocation:
    """One whale move: encircle the best placement or chase a random one.

    The control scalar x decays linearly from 2 to 0 across the run; a single
    random draw r gives A = 2xr - x and C = 2r. |A| < 1 exploits against the
    best placement, otherwise a random population member is the reference.
    The updated vector ref - A*|C*ref_enc - cur_enc| is clamped to [0, 1]
    coordinate-wise and decoded; leftovers await first-fit repair.
    """
    x = 2.0 * (1.0 - generation / params.max_iterations)
    r = rng.random()
    a = 2.0 * x * r - x
    c = 2.0 * r
    if abs(a) < 1.0 or not population:
        reference = best
    else:
        reference = population[rng.randrange(len(population))]
    ref_enc = encode(reference, reference, dc).values
    cur_enc = encode(current, reference, dc).values
    updated = []
    for e_ref, e_cur in zip(ref_enc, cur_enc):
        d = abs(c * e_ref - e_cur)
        updated.append(min(1.0, max(0.0, e_ref - a * d)))
    return decode(WhaleVector(tuple(updated)), reference, current, dc)


def ffd_repair(partial: Allocation, dc: Datacenter) -> Allocation:
    """Place every UNPLACED VM, largest first, on the first server that fits.

    Size is the cpu*storage footprint; candidate servers are scanned in
    ascending location order. Raises InfeasibleError when some VM fits
    nowhere, which signals an over-capacity instance.
    """
    pending = list(partial.unplaced)
    if not pending:
        return partial
    psi = list(partial.psi)
    free = [{r: s.capacity(r) for r in RESOURCES} for s in dc.servers]
    for j, s in enumerate(psi):
        if s != UNPLACED:
            v = dc.vms[j]
            for r in RESOURCES:
                free[s][r] -= v.demand(r)
    order = sorted(range(dc.n_servers), key=lambda i: dc.servers[i].location)
    pending.sort(key=lambda j: (-dc.vms[j].size, j))
    for j in pending:
        v = dc.vms[j]
        for i in order:
            slot = free[i]
            if all(v.demand(r) <= slot[r] for r in RESOURCES):
                psi[j] = i
                for r in RESOURCES:
                    slot[r] -= v.demand(r)
                break
        else:
            raise InfeasibleError(f"vm {j} fits no server")
    return Allocation(tuple(psi))


def crossover(
    parent_a: Allocation,
    parent_b: Allocation,
    dc: Datacenter,
    rng: Random,
) -> tuple[Allocation, Allocation]:
    """Single-point recombination of the server-indexed load lists.

    The crossover point cp in [1, P-1] guarantees both parents contribute.
    Children keep whole per-server loads, so capacity holds by construction;
    a VM appearing in both segments keeps its prefix placement and VMs lost
    to the cut stay UNPLACED for repair.
    """
    if dc.n_servers < 2:
        return parent_a, parent_b
    cp = rng.randint(1, dc.n_servers - 1)
    ga, gb = parent_a.by_server(dc), parent_b.by_server(dc)
    child_a = assignment_from_groups(ga[:cp] + gb[cp:], dc.n_vms)
    child_b = assignment_from_groups(gb[:cp] + ga[cp:], dc.n_vms)
    return child_a, child_b


def mutate(
    alloc: Allocation,
    mutation_rate: float,
    dc: Datacenter,
    rng: Random,
) -> Allocation:
    """With probability mutation_rate, swap the VM loads of two random
    servers; the swap is discarded if either side would overflow."""
    if dc.n_servers < 2 or rng.random() >= mutation_rate:
        return alloc
    i, k = rng.sample(range(dc.n_servers), 2)
    groups = alloc.by_server(dc)
    for target, movers in ((i, groups[k]), (k, groups[i])):
        srv = dc.servers[target]
        for r in RESOURCES:
            if sum(dc.vms[j].demand(r) for j in movers) > srv.capacity(r):
                return alloc
    psi = list(alloc.psi)
    for j in groups[i]:
        psi[j] = k
    for j in groups[k]:
        psi[j] = i
    return Allocation(tuple(psi))


def _member_rng(seed: int, tag: str) -> Random:
    """Independent deterministic stream per population member and stage."""
    return Random(f"{seed}/{tag}")


def optimize(
    dc: Datacenter,
    params: WogaParams,
    *,
    use_whale: bool = True,
    use_ga: bool = True,
    seed_allocations: list[Allocation] | None = None,
    on_generation=None,
) -> ParetoFront:
    """Run the full search loop and return the final non-dominated front.

    Each generation: rank the population, pick the most-crowded front-0
    member as the reference, whale-move every member, repair, cross each
    member with a random partner, mutate and repair the children, then merge
    parents, moved members, children and the elite archive, and keep the top
    population_size by front and crowding. Stops at max_iterations or after
    stall_limit generations without a change in the front-0 objective set.
    """
    X = params.population_size
    empty = Allocation.empty(dc.n_vms)
    ffd_repair(empty, dc)  # proves a full feasible allocation exists

    cache: dict[tuple[int, ...], ObjectiveVector] = {}

    def scored(alloc: Allocation) -> tuple[Allocation, ObjectiveVector]:
        obj = cache.get(alloc.psi)
        if obj is None:
            obj = evaluate(alloc, dc)
            cache[alloc.psi] = obj
        return (alloc, obj)

    def initial_member(k: int) -> Allocation:
        # A random partial start can strand a VM that a clean FFD pass would
        # place, so failed repairs redraw; the empty-start repair is the
        # guaranteed fallback (its feasibility was proven above).
        if k < len(seeded):
            try:
                return ffd_repair(seeded[k], dc)
            except InfeasibleError:
                pass
        for attempt in range(20):
            rng = _member_rng(params.seed, f"init/{k}/{attempt}")
            try:
                return ffd_repair(random_allocation(dc, rng), dc)
            except InfeasibleError:
                continue
        return ffd_repair(Allocation.empty(dc.n_vms), dc)

    seeded = list(seed_allocations or [])
    population = [scored(initial_member(k)) for k in range(X)]

    archive: list[tuple[Allocation, ObjectiveVector]] = []
    history: list[GenerationStats] = []
    stall = 0
    prev_signature: tuple | None = None
    generations = 0

    for g in range(params.max_iterations):
        generations = g + 1
        ranked = non_dominated_sort(population)
        best_alloc, best_obj = select_best(ranked)

        archive = [e for e in archive if not dominates(best_obj, e[1])]
        if all(e[1] != best_obj for e in archive):
            archive.append((best_alloc, best_obj))

        signature = tuple(sorted(population[i][1].as_min_tuple() for i in ranked.fronts[0]))
        if signature == prev_signature:
            stall += 1
        else:
            stall = 0
        prev_signature = signature

        repairs = 0
        moved: list[tuple[Allocation, ObjectiveVector]] = []
        allocs = [m[0] for m in population]
        if use_whale:
            for k, (alloc, _) in enumerate(population):
                rng = _member_rng(params.seed, f"g{g}/m{k}")
                stepped = whale_step(alloc, best_alloc, allocs, dc, params, g, rng)
                if stepped.unplaced:
                    repairs += 1
                try:
                    moved.append(scored(ffd_repair(stepped, dc)))
                except InfeasibleError:
                    moved.append(population[k])  # unrepaired move is rejected
        parents = moved if use_whale else population

        children: list[tuple[Allocation, ObjectiveVector]] = []
        if use_ga:
            for k in range(X):
                rng = _member_rng(params.seed, f"g{g}/c{k}")
                rn = rng.randrange(X - 1)
                if rn >= k:
                    rn += 1
                c1, c2 = crossover(parents[k][0], parents[rn][0], dc, rng)
                for child in (c1, c2):
                    child = mutate(child, params.mutation_rate, dc, rng)
                    if child.unplaced:
                        repairs += 1
                    try:
                        children.append(scored(ffd_repair(child, dc)))
                    except InfeasibleError:
                        continue  # unrepairable offspring is dropped

        pool = list(population) + moved + children
        seen = {m[0].psi for m in pool}
        for elite in archive:
            if elite[0].psi not in seen:
                pool.append(elite)
                seen.add(elite[0].psi)
        population = truncate(non_dominated_sort(pool), X)

        history.append(
            GenerationStats(g, best_obj, len(ranked.fronts[0]), repairs)
        )
        if on_generation is not None:
            on_generation(history[-1])
        if stall >= params.stall_limit:
            break

    final = non_dominated_sort(population)
    front = [population[i] for i in final.fronts[0]]
    return ParetoFront(front, history, generations)
