"""Exception types shared across the package."""


class VmplaceError(Exception):
    """Base class for all package errors."""


class AllocationError(VmplaceError):
    """Malformed allocation: wrong length, unknown server id, or unexpected gaps."""


class InfeasibleError(VmplaceError):
    """The instance cannot be packed: some VM fits no server."""


class ScenarioError(VmplaceError):
    """Inconsistent scenario parameters or catalog definition."""


class TraceError(VmplaceError):
    """Malformed or out-of-range workload trace."""
