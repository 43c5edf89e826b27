"""Independent-cascade influence spread and lazy-greedy seed selection.

A cascade with activation probability ``p`` reaches exactly the nodes
connected to the seeds through "live" edges, where every edge is live
independently with probability ``p``. Each Monte-Carlo run therefore samples
one live-edge world and reads off connected components.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .dp import make_rng
from .graph import Graph


class CascadeError(ValueError):
    pass


@dataclass(frozen=True)
class CascadeConfig:
    edge_prob: float = 0.1
    seed_fraction: float = 0.01
    num_sims: int = 1000

    def __post_init__(self):
        if not 0 <= self.edge_prob <= 1:
            raise CascadeError("edge_prob must lie in [0, 1]")
        if not 0 < self.seed_fraction <= 1:
            raise CascadeError("seed_fraction must lie in (0, 1]")
        if self.num_sims < 1:
            raise CascadeError("num_sims must be at least 1")


def _live_worlds(g: Graph, p: float, rng: np.random.Generator, count: int):
    """Sample ``count`` live-edge worlds at once.

    Worlds are stacked as one block-diagonal graph so a single
    connected-components call labels all of them. Returns ``(labels, sizes)``
    with ``labels`` of shape ``(count, n)`` holding globally unique component
    ids and ``sizes`` indexed by those ids. Draw order matches sampling the
    worlds one after another.
    """
    n, m = g.n, g.m
    live = rng.random((count, m)) < p
    r, e = np.nonzero(live)
    off = r * n
    u, v = g.edges[e, 0] + off, g.edges[e, 1] + off
    a = sp.coo_matrix((np.ones(len(u)), (u, v)), shape=(count * n, count * n))
    _, labels = csgraph.connected_components(a, directed=False)
    return labels.reshape(count, n), np.bincount(labels)


def _world_batches(g: Graph, p: float, rng: np.random.Generator, total: int, budget: int = 2_000_000):
    step = max(1, budget // max(g.m + g.n, 1))
    done = 0
    while done < total:
        k = min(step, total - done)
        yield _live_worlds(g, p, rng, k)
        done += k


def cascade_runs(g: Graph, seeds, cfg: CascadeConfig, rng: np.random.Generator) -> np.ndarray:
    """Activated fraction for each of ``cfg.num_sims`` independent runs."""
    seeds = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if len(seeds) == 0:
        raise CascadeError("seed set is empty")
    if seeds[0] < 0 or seeds[-1] >= g.n:
        raise CascadeError("seed id out of range")
    out = []
    for labels, sizes in _world_batches(g, cfg.edge_prob, rng, cfg.num_sims):
        hit = labels[:, seeds]
        # count each reached component once per world
        hit.sort(axis=1)
        first = np.ones_like(hit, dtype=bool)
        first[:, 1:] = hit[:, 1:] != hit[:, :-1]
        out.append(np.where(first, sizes[hit], 0).sum(axis=1) / g.n)
    return np.concatenate(out)


def independent_cascade(g: Graph, seeds, cfg: CascadeConfig, rng: np.random.Generator) -> float:
    """Mean fraction of nodes activated from ``seeds``."""
    return float(cascade_runs(g, seeds, cfg, rng).mean())


def select_seeds(g: Graph, fraction: float, rng: np.random.Generator, cfg: CascadeConfig = CascadeConfig()) -> list[int]:
    """CELF lazy greedy on ``cfg.num_sims`` shared live-edge snapshots.

    Picks ``ceil(fraction * n)`` seeds; ties go to the smaller node id.
    """
    if not 0 < fraction <= 1:
        raise CascadeError("fraction must lie in (0, 1]")
    k = min(g.n, math.ceil(fraction * g.n - 1e-9))
    if k >= g.n:
        return list(range(g.n))
    comp_ids, sizes, offset = [], [], 0
    for labels, sz in _world_batches(g, cfg.edge_prob, rng, cfg.num_sims):
        comp_ids.append(labels + offset)
        sizes.append(sz)
        offset += len(sz)
    comp_ids = np.concatenate(comp_ids)
    size = np.concatenate(sizes).astype(float)
    covered = np.zeros(len(size), dtype=bool)

    def gain(v: int) -> float:
        c = comp_ids[:, v]
        return float(size[c][~covered[c]].sum()) / cfg.num_sims

    first = size[comp_ids].sum(axis=0) / cfg.num_sims
    heap = [(-first[v], v, 0) for v in range(g.n)]
    heapq.heapify(heap)
    chosen: list[int] = []
    while len(chosen) < k:
        neg, v, stamp = heapq.heappop(heap)
        if stamp == len(chosen):
            chosen.append(v)
            covered[comp_ids[:, v]] = True
        else:
            heapq.heappush(heap, (-gain(v), v, len(chosen)))
    return chosen


def influence_spread(g: Graph, cfg: CascadeConfig, seed) -> float:
    """Select seeds then simulate; ``seed`` fixes both stages."""
    seeds = select_seeds(g, cfg.seed_fraction, make_rng(seed, 0), cfg)
    return independent_cascade(g, seeds, cfg, make_rng(seed, 1))


def spread_error(g: Graph, g_priv: Graph, cfg: CascadeConfig, rng: np.random.Generator) -> float:
    """``|spread(g) - spread(g_priv)|`` as a fraction of nodes.

    Both graphs are run with the same random streams (common random numbers),
    so identical graphs give exactly zero.
    """
    if g.n == 0 or g_priv.n == 0:
        raise CascadeError("graphs must be non-empty")
    seed = rng.bit_generator.seed_seq.spawn(1)[0]
    return abs(influence_spread(g, cfg, seed) - influence_spread(g_priv, cfg, seed))
