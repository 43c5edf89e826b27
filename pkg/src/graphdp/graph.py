"""Undirected simple graphs, edge-list ingestion and the Chung-Lu generator."""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

MAX_FEATURES = 50

_SPLIT = re.compile(r"[,\s]+")


class GraphError(ValueError):
    """Raised for invalid graph data or malformed input files."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    ``edges`` is an ``(m, 2)`` int array with ``u < v`` in every row, sorted
    lexicographically. Optional ``features`` is an ``(n, d)`` binary matrix and
    ``labels`` a length-``n`` int vector (``-1`` marks an unlabelled node).
    """

    n: int
    edges: np.ndarray
    features: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        edges.setflags(write=False)
        if self.n < 0:
            raise GraphError("node count must be non-negative")
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.n:
                raise GraphError("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise GraphError("edges must satisfy u < v (no self-loops)")
            keys = edges[:, 0] * self.n + edges[:, 1]
            if np.any(np.diff(keys) <= 0):
                raise GraphError("edges must be sorted and unique")
        if self.features is not None:
            x = np.asarray(self.features)
            if x.ndim != 2 or x.shape[0] != self.n:
                raise GraphError(f"features must have shape (n, d), got {x.shape}")
            if x.shape[1] > MAX_FEATURES:
                raise GraphError(
                    f"{x.shape[1]} feature columns; select at most {MAX_FEATURES} before loading"
                )
            if not np.isin(x, (0, 1)).all():
                raise GraphError("features must be binary")
            x = x.astype(np.int8)
            x.setflags(write=False)
            object.__setattr__(self, "features", x)
        if self.labels is not None:
            y = np.asarray(self.labels, dtype=np.int64)
            if y.shape != (self.n,):
                raise GraphError("labels must have one entry per node")
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[Sequence[int]], features=None, labels=None) -> "Graph":
        """Build a graph from arbitrary pairs, canonicalising orientation and order.

        Self-loops and duplicates are rejected; use :func:`load_edge_list` for
        lenient ingestion.
        """
        arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphError("self-loop")
        arr = np.sort(arr, axis=1)
        if len(arr):
            keys = arr[:, 0] * max(n, 1) + arr[:, 1]
            order = np.argsort(keys, kind="stable")
            arr = arr[order]
            if np.any(np.diff(keys[order]) == 0):
                raise GraphError("duplicate edge")
        return cls(n, arr, features, labels)

    @classmethod
    def _from_keys(cls, n: int, keys: np.ndarray, features=None, labels=None) -> "Graph":
        keys = np.unique(keys)
        return cls(n, np.stack([keys // n, keys % n], axis=1) if n else keys.reshape(-1, 2), features, labels)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))

    def edge_keys(self) -> np.ndarray:
        """Sorted integer codes ``u * n + v`` of the edges."""
        if "keys" not in self._cache:
            self._cache["keys"] = self.edges[:, 0] * self.n + self.edges[:, 1]
        return self._cache["keys"]

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 CSR adjacency matrix (float64)."""
        if "adj" not in self._cache:
            u, v = self.edges[:, 0], self.edges[:, 1]
            data = np.ones(2 * self.m)
            a = sp.csr_matrix(
                (data, (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(self.n, self.n)
            )
            self._cache["adj"] = a
        return self._cache["adj"]

    def neighbors(self) -> list[np.ndarray]:
        if "nbrs" not in self._cache:
            a = self.adjacency()
            self._cache["nbrs"] = [a.indices[a.indptr[i] : a.indptr[i + 1]] for i in range(self.n)]
        return self._cache["nbrs"]

    def degrees(self) -> np.ndarray:
        return degree_sequence(self)

    def with_features(self, features=None, labels=None) -> "Graph":
        return Graph(self.n, self.edges, features, labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.edges, other.edges)
            and _opt_equal(self.features, other.features)
            and _opt_equal(self.labels, other.labels)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _opt_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


@dataclass
class LoadResult:
    graph: Graph
    id_map: dict[str, int]
    self_loops: int = 0
    duplicates: int = 0


def _label_order(label: str):
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


def load_edge_list(path, features_path=None, labels_path=None) -> LoadResult:
    """Read a whitespace/comma separated edge list.

    Node labels are compacted to ``0..n-1`` in sorted order (numerically when
    the label is an integer), so writing a loaded graph and reading it back
    reproduces it. Self loops and duplicate edges are dropped and counted.
    """
    path = Path(path)
    raw_pairs: list[tuple[str, str]] = []
    text = path.read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p for p in _SPLIT.split(line) if p]
        if len(parts) != 2:
            raise GraphError(f"{path}:{lineno}: expected two node ids, got {raw!r}")
        raw_pairs.append((parts[0], parts[1]))
    if not raw_pairs:
        raise GraphError(f"{path}: no edges found")
    labels_seen = {x for pair in raw_pairs for x in pair}
    id_map = {lab: i for i, lab in enumerate(sorted(labels_seen, key=_label_order))}
    keys: set[tuple[int, int]] = set()
    self_loops = dups = 0
    for x, y in raw_pairs:
        a, b = id_map[x], id_map[y]
        if a == b:
            self_loops += 1
            continue
        e = (a, b) if a < b else (b, a)
        if e in keys:
            dups += 1
            continue
        keys.add(e)
    if self_loops or dups:
        log.info("%s: dropped %d self-loops and %d duplicate edges", path, self_loops, dups)
    n = len(id_map)
    features = _load_node_table(features_path, id_map, n, "features") if features_path else None
    labels = _load_node_table(labels_path, id_map, n, "labels") if labels_path else None
    if labels is not None:
        labels = labels[:, 0]
    g = Graph.from_edges(n, sorted(keys), features, labels)
    return LoadResult(g, id_map, self_loops, dups)


def _load_node_table(path, id_map, n, what) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise GraphError(f"{path}: empty {what} file")
    header, body = rows[0], rows[1:]
    width = len(header) - 1
    if what == "features" and width > MAX_FEATURES:
        raise GraphError(f"{path}: {width} feature columns; select at most {MAX_FEATURES} first")
    out = np.full((n, width), -1 if what == "labels" else 0, dtype=np.int64)
    for lineno, row in enumerate(body, 2):
        if len(row) != width + 1:
            raise GraphError(f"{path}:{lineno}: expected {width + 1} columns")
        node = row[0].strip()
        if node not in id_map:
            continue
        try:
            out[id_map[node]] = [int(x) for x in row[1:]]
        except ValueError as exc:
            raise GraphError(f"{path}:{lineno}: {exc}") from None
    return out


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u, v in g.edges.tolist():
            fh.write(f"{u} {v}\n")


def induced_subgraph(g: Graph, nodes) -> tuple[Graph, dict[int, int]]:
    """Return ``G[S]`` with ids re-compacted in ascending order, plus the old->new map."""
    s = np.unique(np.asarray(list(nodes), dtype=np.int64))
    if len(s) and (s[0] < 0 or s[-1] >= g.n):
        raise GraphError("node id out of range")
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[s] = np.arange(len(s))
    e = remap[g.edges]
    e = e[(e >= 0).all(axis=1)]
    feats = g.features[s] if g.features is not None else None
    labels = g.labels[s] if g.labels is not None else None
    return Graph(len(s), e, feats, labels), {int(o): i for i, o in enumerate(s)}


def degree_sequence(g: Graph) -> np.ndarray:
    if "deg" not in g._cache:
        g._cache["deg"] = np.bincount(g.edges.ravel(), minlength=g.n).astype(np.int64)
    return g._cache["deg"]


def relabel(g: Graph, perm) -> Graph:
    """Apply node permutation ``old -> perm[old]``."""
    perm = np.asarray(perm, dtype=np.int64)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(g.n)
    feats = g.features[inv] if g.features is not None else None
    labels = g.labels[inv] if g.labels is not None else None
    return Graph.from_edges(g.n, perm[g.edges], feats, labels)


def _triu_pair_rows(n: int, prob_row, rng: np.random.Generator, chunk: int = 4_000_000) -> np.ndarray:
    """Sample edges row by row: ``prob_row(i)`` gives probabilities for pairs ``(i, j>i)``."""
    out = []
    i = 0
    while i < n - 1:
        # group rows so each draw handles roughly `chunk` pairs
        j, size = i, 0
        while j < n - 1 and (size == 0 or size + (n - 1 - j) <= chunk):
            size += n - 1 - j
            j += 1
        draws = rng.random(size)
        off = 0
        for r in range(i, j):
            w = n - 1 - r
            hit = np.flatnonzero(draws[off : off + w] < prob_row(r))
            if len(hit):
                out.append(r * n + r + 1 + hit)
            off += w
        i = j
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def chung_lu_sample(expected_degrees, rng: np.random.Generator) -> Graph:
    """Chung-Lu graph: pair ``(u, v)`` present with prob ``min(1, d_u d_v / sum(d))``."""
    w = np.asarray(expected_degrees, dtype=float)
    n = len(w)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise GraphError("expected degrees must be finite and non-negative")
    total = w.sum()
    if total == 0 or n < 2:
        return Graph(n, np.empty((0, 2), dtype=np.int64))
    keys = _triu_pair_rows(n, lambda r: np.minimum(1.0, w[r] * w[r + 1 :] / total), rng)
    return Graph._from_keys(n, keys)


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> Graph:
    keys = _triu_pair_rows(n, lambda r: p, rng) if n > 1 else np.empty(0, dtype=np.int64)
    return Graph._from_keys(n, keys)


def sample_non_edges(n: int, forbidden_keys: np.ndarray, count: int, rng) -> np.ndarray:
    """``count`` distinct uniform pairs ``u < v`` whose codes avoid ``forbidden_keys``."""
    forbidden = set(forbidden_keys.tolist())
    total = n * (n - 1) // 2
    if total - len(forbidden) < count:
        raise GraphError("not enough non-edges to sample from")
    out: dict[int, None] = {}
    while len(out) < count:
        u = rng.integers(0, n, size=2 * (count - len(out)) + 8)
        v = rng.integers(0, n, size=len(u))
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b:
                continue
            if a > b:
                a, b = b, a
            key = a * n + b
            if key in forbidden or key in out:
                continue
            out[key] = None
            if len(out) == count:
                break
    keys = np.fromiter(out, dtype=np.int64)
    return np.stack([keys // n, keys % n], axis=1)
