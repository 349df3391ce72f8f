"""Reference allocators the optimizer is compared against."""

from __future__ import annotations

from random import Random

from .errors import InfeasibleError
from .model import RESOURCES, UNPLACED, Allocation, Datacenter
from .woga import ParetoFront, WogaParams, optimize


def first_fit(dc: Datacenter) -> Allocation:
    """Each VM, in input order, goes to the lowest-location server that fits."""
    psi = [UNPLACED] * dc.n_vms
    free = [{r: s.capacity(r) for r in RESOURCES} for s in dc.servers]
    order = sorted(range(dc.n_servers), key=lambda i: dc.servers[i].location)
    for j, v in enumerate(dc.vms):
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


def best_fit(dc: Datacenter) -> Allocation:
    """Each VM goes to the feasible server leaving the least residual CPU,
    ties broken by lowest location."""
    psi = [UNPLACED] * dc.n_vms
    free = [{r: s.capacity(r) for r in RESOURCES} for s in dc.servers]
    for j, v in enumerate(dc.vms):
        choice = None
        choice_key = None
        for i in range(dc.n_servers):
            slot = free[i]
            if not all(v.demand(r) <= slot[r] for r in RESOURCES):
                continue
            key = (slot["cpu"] - v.cpu, dc.servers[i].location)
            if choice_key is None or key < choice_key:
                choice, choice_key = i, key
        if choice is None:
            raise InfeasibleError(f"vm {j} fits no server")
        psi[j] = choice
        for r in RESOURCES:
            free[choice][r] -= v.demand(r)
    return Allocation(tuple(psi))


def random_fit(dc: Datacenter, rng: Random) -> Allocation:
    """Uniformly random server per VM, redrawing on a full server up to
    10*P times before declaring the instance infeasible."""
    psi = [UNPLACED] * dc.n_vms
    if dc.n_vms == 0:
        return Allocation(tuple(psi))
    if dc.n_servers == 0:
        raise InfeasibleError("no servers")
    free = [{r: s.capacity(r) for r in RESOURCES} for s in dc.servers]
    budget = 10 * dc.n_servers
    for j, v in enumerate(dc.vms):
        for _ in range(budget):
            i = rng.randrange(dc.n_servers)
            slot = free[i]
            if all(v.demand(r) <= slot[r] for r in RESOURCES):
                psi[j] = i
                for r in RESOURCES:
                    slot[r] -= v.demand(r)
                break
        else:
            raise InfeasibleError(f"vm {j} found no server in {budget} draws")
    return Allocation(tuple(psi))


def ga_only(dc: Datacenter, params: WogaParams) -> ParetoFront:
    """The search loop with the whale move disabled (pure GA)."""
    return optimize(dc, params, use_whale=False, use_ga=True)


def woa_only(dc: Datacenter, params: WogaParams) -> ParetoFront:
    """The search loop with crossover and mutation disabled (pure whale)."""
    return optimize(dc, params, use_whale=True, use_ga=False)
