"""Reachability preservers: construction, extremal instances, and a Steiner
network approximation built on them."""
from __future__ import annotations

__version__ = "0.1.0"

from .decremental import DecrementalReach
from .graph import (
    ContractViolation,
    DemandSet,
    DirectedGraph,
    FormatError,
    condense,
    expand_preserver,
    is_preserver,
    load_demands,
    load_graph,
)
from .preserver import (
    AlgoConfig,
    BudgetExceeded,
    PreserverResult,
    bound_pairwise,
    bound_source_restricted,
    brute_force_opt,
    build_preserver,
    greedy_prune,
)

__all__ = [
    "AlgoConfig",
    "BudgetExceeded",
    "ContractViolation",
    "DecrementalReach",
    "DemandSet",
    "DirectedGraph",
    "FormatError",
    "PreserverResult",
    "bound_pairwise",
    "bound_source_restricted",
    "brute_force_opt",
    "build_preserver",
    "condense",
    "expand_preserver",
    "greedy_prune",
    "is_preserver",
    "load_demands",
    "load_graph",
]
