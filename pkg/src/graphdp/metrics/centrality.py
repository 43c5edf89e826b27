"""Betweenness, closeness and PageRank.

Betweenness uses Brandes' dependency accumulation, vectorised over a block of
sources at a time: the BFS frontier advances by one sparse product per level
and the backward sweep is one product per level as well.

The sampled modes draw a uniform pivot set of sources without replacement and
rescale. The pivot count comes from a Hoeffding-style rule in the requested
relative error and is capped at ``n``; at the cap the estimate is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..graph import Graph
from .basic import MetricError, bfs_distance_blocks


@dataclass
class CentralityEstimate:
    values: np.ndarray
    method: str  # "exact" | "sampled"
    target_rel_error: float = 0.0
    samples: int = 0
    meta: dict = field(default_factory=dict)


def pivot_sample_size(n: int, target_rel_error: float, failure_prob: float = 0.1) -> int:
    if target_rel_error <= 0:
        raise MetricError("target relative error must be positive")
    k = math.ceil(math.log(2 * max(n, 1) / failure_prob) / (2 * target_rel_error**2))
    return min(n, k)


def _block_size(n: int) -> int:
    return max(1, min(n, 2_000_000 // max(n, 1)))


def _brandes_dependencies(g: Graph, sources: np.ndarray) -> np.ndarray:
    """Sum over ``sources`` of single-source dependencies ``delta_s(v)``."""
    a = g.adjacency()
    n = g.n
    total = np.zeros(n)
    bs = _block_size(n)
    for i in range(0, len(sources), bs):
        src = sources[i : i + bs]
        b = len(src)
        rows = np.arange(b)
        sigma = np.zeros((b, n))
        sigma[rows, src] = 1.0
        seen = np.zeros((b, n), dtype=bool)
        seen[rows, src] = True
        frontier = sigma.copy()
        levels = [seen.copy()]
        while True:
            nxt = np.asarray((a @ frontier.T).T)
            new = (nxt > 0) & ~seen
            if not new.any():
                break
            seen |= new
            frontier = np.where(new, nxt, 0.0)
            sigma += frontier
            levels.append(new)
        delta = np.zeros((b, n))
        safe = np.where(sigma > 0, sigma, 1.0)
        for d in range(len(levels) - 1, 0, -1):
            coef = np.where(levels[d], (1.0 + delta) / safe, 0.0)
            back = np.asarray((a @ coef.T).T)
            delta += np.where(levels[d - 1], sigma * back, 0.0)
        delta[rows, src] = 0.0
        total += delta.sum(axis=0)
    return total


def betweenness(g: Graph, mode: str = "exact", target_rel_error: float = 0.01, rng=None) -> CentralityEstimate:
    """Unnormalised betweenness over unordered pairs, endpoints excluded."""
    if mode == "exact":
        vals = _brandes_dependencies(g, np.arange(g.n)) / 2
        return CentralityEstimate(vals, "exact", 0.0, g.n)
    if mode != "sampled":
        raise MetricError(f"unknown mode {mode!r}")
    k = pivot_sample_size(g.n, target_rel_error)
    pivots = _pivots(g.n, k, rng)
    vals = _brandes_dependencies(g, pivots) * (g.n / max(k, 1)) / 2
    return CentralityEstimate(vals, "sampled", target_rel_error, k)


def _pivots(n: int, k: int, rng) -> np.ndarray:
    if k >= n:
        return np.arange(n)
    if rng is None:
        raise MetricError("sampled mode needs a generator")
    return np.sort(rng.choice(n, size=k, replace=False))


def _closeness_from(g: Graph, sources: np.ndarray):
    """Per node: (#pivots reachable excluding itself, sum of distances to them, self-is-pivot)."""
    reach = np.zeros(g.n)
    dsum = np.zeros(g.n)
    for ids, dist in bfs_distance_blocks(g, sources):
        fin = np.isfinite(dist)
        reach += fin.sum(axis=0)
        dsum += np.where(fin, dist, 0.0).sum(axis=0)
    is_pivot = np.zeros(g.n, dtype=bool)
    is_pivot[sources] = True
    reach -= is_pivot  # distance to self
    return reach, dsum, is_pivot


def _wf_closeness(reach_others: np.ndarray, dsum: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    ok = dsum > 0
    if n > 1:
        out[ok] = (reach_others[ok] / dsum[ok]) * (reach_others[ok] / (n - 1))
    return out


def closeness(g: Graph, mode: str = "exact", target_rel_error: float = 0.01, rng=None) -> CentralityEstimate:
    """Closeness with the within-component correction.

    ``C(v) = (r-1)/sum_d * (r-1)/(n-1)`` with ``r`` the size of v's component;
    isolated vertices score 0.
    """
    if g.n < 2:
        raise MetricError("closeness needs at least two nodes")
    if mode == "exact":
        reach, dsum, _ = _closeness_from(g, np.arange(g.n))
        return CentralityEstimate(_wf_closeness(reach, dsum, g.n), "exact", 0.0, g.n)
    if mode != "sampled":
        raise MetricError(f"unknown mode {mode!r}")
    k = pivot_sample_size(g.n, target_rel_error)
    pivots = _pivots(g.n, k, rng)
    reach, dsum, is_pivot = _closeness_from(g, pivots)
    # scale pivot totals up to all n-1 other nodes
    others = np.where(is_pivot, k - 1, k).astype(float)
    scale = np.divide(g.n - 1, others, out=np.zeros(g.n), where=others > 0)
    vals = _wf_closeness(reach * scale, dsum * scale, g.n)
    return CentralityEstimate(vals, "sampled", target_rel_error, k)


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 10_000) -> np.ndarray:
    """Power iteration; dangling nodes spread their mass uniformly."""
    if not 0 < damping < 1:
        raise MetricError("damping must lie in (0, 1)")
    n = g.n
    if n == 0:
        raise MetricError("empty graph")
    a = g.adjacency()
    deg = np.asarray(a.sum(axis=1)).ravel()
    dangling = deg == 0
    inv = np.divide(1.0, deg, out=np.zeros(n), where=~dangling)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = damping * (a @ (x * inv)) + (damping * x[dangling].sum() + 1 - damping) / n
        nxt /= nxt.sum()
        if np.abs(nxt - x).sum() < tol:
            return nxt
        x = nxt
    raise MetricError("pagerank did not converge")
