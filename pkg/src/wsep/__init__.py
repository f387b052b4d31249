"""Minimum W-separators: exact oracles, the exact LP relaxation, reducible pairs
and kernel rules, and the Global SEMO family of evolutionary solvers."""

from .graph import Graph, GraphFormatError, dump_graph, load_graph
from .separator import (
    BudgetExceeded,
    Instance,
    OptResult,
    Packing,
    SearchPoint,
    brute_force_opt,
    is_w_separator,
    max_packing,
    max_packing_brute,
    uncovered,
    verify_packing,
)
from .lp import lp_value, persistent_ones, avoid_ones_solution, lp_superadditivity_check
from .reducible import (
    ReduciblePair,
    crown_reduce,
    degree_reduce,
    find_strictly_reducible_pair,
    kernel_size_check,
    minimize_pair,
    packing_after_deletion,
    packing_from_pair,
    reducible_sequence,
    verify_reducible_pair,
)
from .emo import FitnessVector, Population, StopSpec, RunTrace, evaluate, run, weakly_dominates

__all__ = [
    "Graph", "GraphFormatError", "dump_graph", "load_graph",
    "BudgetExceeded", "Instance", "OptResult", "Packing", "SearchPoint", "brute_force_opt",
    "is_w_separator", "max_packing", "max_packing_brute", "uncovered", "verify_packing",
    "lp_value", "persistent_ones", "avoid_ones_solution", "lp_superadditivity_check",
    "ReduciblePair", "crown_reduce", "degree_reduce", "find_strictly_reducible_pair",
    "kernel_size_check", "minimize_pair", "packing_after_deletion", "packing_from_pair",
    "reducible_sequence", "verify_reducible_pair",
    "FitnessVector", "Population", "StopSpec", "RunTrace", "evaluate", "run", "weakly_dominates",
]
