"""Benchmark harness for differentially private graph release."""

from .dp import PrivacyParams, Target, Trust, make_rng
from .graph import Graph, GraphError, degree_sequence, induced_subgraph, load_edge_list

__version__ = "0.1.0"

__all__ = [
    "Graph", "GraphError", "PrivacyParams", "Target", "Trust", "degree_sequence", "induced_subgraph",
    "load_edge_list", "make_rng",
]
