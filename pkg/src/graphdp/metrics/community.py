from __future__ import annotations

from collections import defaultdict

import numpy as np

from ..graph import Graph, degree_sequence
from .basic import MetricError


def dense_labels(labels) -> np.ndarray:
    """Relabel community ids to ``0..k-1`` in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inv].astype(np.int64)


def modularity(g: Graph, partition) -> float:
    """Newman modularity of ``partition`` (resolution 1)."""
    if g.m == 0:
        raise MetricError("modularity undefined without edges")
    c = dense_labels(partition)
    if len(c) != g.n:
        raise MetricError("partition size does not match graph")
    k = c.max() + 1
    deg = degree_sequence(g).astype(float)
    same = c[g.edges[:, 0]] == c[g.edges[:, 1]]
    internal = np.bincount(c[g.edges[same, 0]], minlength=k).astype(float)
    tot = np.bincount(c, weights=deg, minlength=k)
    m = float(g.m)
    return float(internal.sum() / m - np.sum((tot / (2 * m)) ** 2))


def _one_level(adj, k, m2, rng, resolution):
    n = len(adj)
    comm = np.arange(n)
    tot = k.copy()
    moved_any = False
    while True:
        moves = 0
        for i in rng.permutation(n):
            ci = comm[i]
            ki = k[i]
            links = defaultdict(float)
            for j, w in adj[i].items():
                links[comm[j]] += w
            tot[ci] -= ki
            best_c = ci
            best = links.get(ci, 0.0) - resolution * tot[ci] * ki / m2
            for c, w in links.items():
                gain = w - resolution * tot[c] * ki / m2
                if gain > best + 1e-12:
                    best, best_c = gain, c
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                moves += 1
        if moves == 0:
            break
        moved_any = True
    return dense_labels(comm), moved_any


def _aggregate(adj, selfw, comm):
    k = comm.max() + 1
    new_adj = [defaultdict(float) for _ in range(k)]
    new_self = np.zeros(k)
    np.add.at(new_self, comm, selfw)
    for i, nb in enumerate(adj):
        ci = comm[i]
        for j, w in nb.items():
            cj = comm[j]
            if ci == cj:
                if i < j:
                    new_self[ci] += w
            else:
                new_adj[ci][cj] += w
    return [dict(d) for d in new_adj], new_self


def louvain(g: Graph, rng: np.random.Generator, initial=None, resolution: float = 1.0) -> np.ndarray:
    """Louvain community detection (local moving + aggregation until stable).

    Node visiting order is drawn from ``rng``. ``initial`` seeds the search with
    an existing partition, which the result never scores worse than.
    """
    n = g.n
    if g.m == 0:
        return np.arange(n)
    adj = [dict.fromkeys(nb.tolist(), 1.0) for nb in g.neighbors()]
    selfw = np.zeros(n)
    member = np.arange(n)
    if initial is not None:
        member = dense_labels(initial)
        if len(member) != n:
            raise MetricError("initial partition size does not match graph")
        adj, selfw = _aggregate(adj, selfw, member)
    m2 = 2.0 * g.m
    while True:
        k = np.array([sum(nb.values()) for nb in adj]) + 2 * selfw
        comm, improved = _one_level(adj, k, m2, rng, resolution)
        if not improved:
            break
        member = comm[member]
        adj, selfw = _aggregate(adj, selfw, comm)
    return dense_labels(member)


def _comb2(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1) / 2


def ari(a, b) -> float:
    """Adjusted Rand index; 1.0 when the chance-corrected denominator vanishes."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise MetricError("partitions have different sizes")
    n = len(a)
    if n < 2:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    pairs = ai.astype(np.int64) * (bi.max() + 1) + bi
    nij = np.unique(pairs, return_counts=True)[1]
    sum_ij = _comb2(nij).sum()
    sa = _comb2(np.bincount(ai)).sum()
    sb = _comb2(np.bincount(bi)).sum()
    expected = sa * sb / _comb2(n)
    denom = 0.5 * (sa + sb) - expected
    if denom == 0:
        return 1.0
    return float((sum_ij - expected) / denom)
