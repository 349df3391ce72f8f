"""Multi-objective VM placement: model, objectives, search and simulation."""

from .errors import (
    AllocationError,
    InfeasibleError,
    ScenarioError,
    TraceError,
    VmplaceError,
)
from .model import (
    UNPLACED,
    Allocation,
    Datacenter,
    ServerSpec,
    VmSpec,
    feasible,
    random_allocation,
)
from .objectives import (
    EpochSeries,
    ObjectiveVector,
    communication_cost,
    conflicting_servers,
    evaluate,
    power,
    ru_datacenter,
    server_utilization,
)
from .pareto import (
    RankedPopulation,
    crowding_distance,
    dominates,
    non_dominated_sort,
    select_best,
    truncate,
)
from .woga import (
    ParetoFront,
    WhaleVector,
    WogaParams,
    crossover,
    decode,
    encode,
    ffd_repair,
    mutate,
    optimize,
    whale_step,
)

__version__ = "0.1.0"

__all__ = [
    "UNPLACED",
    "Allocation",
    "AllocationError",
    "Datacenter",
    "EpochSeries",
    "InfeasibleError",
    "ObjectiveVector",
    "ParetoFront",
    "RankedPopulation",
    "ScenarioError",
    "ServerSpec",
    "TraceError",
    "VmSpec",
    "VmplaceError",
    "WhaleVector",
    "WogaParams",
    "communication_cost",
    "conflicting_servers",
    "crossover",
    "crowding_distance",
    "decode",
    "dominates",
    "encode",
    "evaluate",
    "feasible",
    "ffd_repair",
    "mutate",
    "non_dominated_sort",
    "optimize",
    "power",
    "random_allocation",
    "ru_datacenter",
    "select_best",
    "server_utilization",
    "truncate",
    "whale_step",
]
