"""Multicast trees over optical topologies: build them, place a bounded
number of diffusing (branching) nodes optimally, and measure the bandwidth
gain experimentally."""

from .loads import brute_force_optimal, load, materialize_paths, path_numbers
from .solver import Placement, optimal_loads_by_budget, solve_dnmtp
from .topology import Graph, MulticastRequest, average_degree, generate_waxman, shortest_path_tree
from .trees import RootedTree, build_shp_tree, build_stt_tree, validate_tree

__all__ = [
    "Graph",
    "MulticastRequest",
    "Placement",
    "RootedTree",
    "average_degree",
    "brute_force_optimal",
    "build_shp_tree",
    "build_stt_tree",
    "generate_waxman",
    "load",
    "materialize_paths",
    "optimal_loads_by_budget",
    "path_numbers",
    "shortest_path_tree",
    "solve_dnmtp",
    "validate_tree",
]
