from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csgraph

from ..graph import Graph, degree_sequence

UNDEFINED = math.nan


class MetricError(ValueError):
    """A metric's preconditions do not hold for the given graph(s)."""


def is_undefined(x) -> bool:
    return x is None or (isinstance(x, float) and math.isnan(x))


def density(g: Graph) -> float:
    if g.n < 2:
        raise MetricError("density needs at least two nodes")
    return g.m / (g.n * (g.n - 1) / 2)


def bfs_distance_blocks(g: Graph, sources=None, block: int = 256):
    """Yield ``(source_ids, dist)`` blocks of unweighted shortest-path distances (inf if unreachable)."""
    src = np.arange(g.n) if sources is None else np.asarray(sources, dtype=np.int64)
    a = g.adjacency()
    for i in range(0, len(src), block):
        ids = src[i : i + block]
        yield ids, csgraph.shortest_path(a, method="D", unweighted=True, directed=False, indices=ids)


def harmonic_diameter(g: Graph) -> float:
    """``|SD| / sum(1/d)`` over unordered node pairs.

    Unreachable pairs count in ``|SD|`` and add zero to the reciprocal sum.
    """
    if g.n < 2:
        raise MetricError("harmonic diameter needs at least two nodes")
    total = 0.0
    for ids, dist in bfs_distance_blocks(g):
        with np.errstate(divide="ignore"):
            inv = 1.0 / dist
        inv[~np.isfinite(inv)] = 0.0
        total += inv.sum()
    total /= 2  # each unordered pair counted from both ends
    if total == 0:
        raise MetricError("no reachable pairs")
    pairs = g.n * (g.n - 1) / 2
    return pairs / total


def assortativity(g: Graph) -> float:
    """Degree assortativity: Pearson correlation of endpoint degrees.

    Returns :data:`UNDEFINED` (NaN) when the endpoint-degree variance is zero.
    """
    if g.m == 0:
        return UNDEFINED
    deg = degree_sequence(g).astype(float)
    x = np.concatenate([deg[g.edges[:, 0]], deg[g.edges[:, 1]]])
    y = np.concatenate([deg[g.edges[:, 1]], deg[g.edges[:, 0]]])
    xc = x - x.mean()
    yc = y - y.mean()
    var = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if var <= 1e-12 * len(x):
        return UNDEFINED
    return float(xc @ yc) / var


def triangles(g: Graph) -> np.ndarray:
    a = g.adjacency()
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2


def clustering_coefficients(g: Graph) -> np.ndarray:
    """Local clustering ``2T(v) / (deg(v)(deg(v)-1))``; zero where ``deg < 2``."""
    deg = degree_sequence(g).astype(float)
    t = triangles(g)
    out = np.zeros(g.n)
    ok = deg >= 2
    out[ok] = 2 * t[ok] / (deg[ok] * (deg[ok] - 1))
    return out


def degree_distribution(g: Graph) -> np.ndarray:
    return degree_sequence(g).astype(float)
