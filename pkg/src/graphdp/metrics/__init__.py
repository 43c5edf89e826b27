from .basic import (
    UNDEFINED,
    MetricError,
    assortativity,
    clustering_coefficients,
    degree_distribution,
    density,
    harmonic_diameter,
    is_undefined,
)
from .centrality import CentralityEstimate, betweenness, closeness, pagerank, pivot_sample_size
from .community import ari, dense_labels, louvain, modularity
from .distance import error, wasserstein1
from .report import MetricReport, MetricValue

__all__ = [
    "UNDEFINED", "MetricError", "assortativity", "clustering_coefficients", "degree_distribution",
    "density", "harmonic_diameter", "is_undefined", "CentralityEstimate", "betweenness", "closeness",
    "pagerank", "pivot_sample_size", "ari", "dense_labels", "louvain", "modularity", "error",
    "wasserstein1", "MetricReport", "MetricValue",
]
