"""Empirical privacy attacks and their scores.

Edge privacy: membership inference on labelled node pairs and edge-set
reconstruction scored by Frobenius relative error. Node privacy: a seed-free
structural de-anonymisation scored by edge correctness and the symmetric
substructure score. The attacks are deliberately simple baselines; the scores
are the standard definitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph, degree_sequence, sample_non_edges


class AttackError(ValueError):
    pass


@dataclass
class AttackReport:
    attack: str
    metric: str
    value: float
    epsilon: float = math.nan
    trial: int = -1


@dataclass(frozen=True)
class LabeledPairs:
    pairs: np.ndarray  # (k, 2)
    labels: np.ndarray  # 1 = edge of the original graph

    def __post_init__(self):
        if len(self.pairs) != len(self.labels):
            raise AttackError("pairs and labels differ in length")


def balanced_pairs(g: Graph, count: int, rng: np.random.Generator) -> LabeledPairs:
    """``count`` true edges and ``count`` non-edges of ``g``, drawn uniformly."""
    count = min(count, g.m)
    if count == 0:
        raise AttackError("graph has no edges to sample")
    pos = g.edges[np.sort(rng.choice(g.m, size=count, replace=False))]
    neg = sample_non_edges(g.n, g.edge_keys(), count, rng)
    pairs = np.concatenate([pos, neg])
    labels = np.r_[np.ones(count, dtype=np.int8), np.zeros(count, dtype=np.int8)]
    order = rng.permutation(len(pairs))
    return LabeledPairs(pairs[order], labels[order])


def _has_edge(g: Graph, pairs: np.ndarray) -> np.ndarray:
    p = np.sort(pairs, axis=1)
    keys = p[:, 0] * g.n + p[:, 1]
    return np.isin(keys, g.edge_keys())


def common_neighbors(g: Graph, pairs: np.ndarray) -> np.ndarray:
    a = g.adjacency()
    rows_u = a[pairs[:, 0]]
    rows_v = a[pairs[:, 1]]
    return np.asarray(rows_u.multiply(rows_v).sum(axis=1)).ravel()


def best_threshold(scores: np.ndarray, labels: np.ndarray) -> float:
    """Threshold ``t`` maximising balanced accuracy of ``score >= t``."""
    pos = labels == 1
    cands = np.unique(np.concatenate([scores, [np.inf]]))
    best_t, best_acc = cands[0], -1.0
    for t in cands:
        pred = scores >= t
        tpr = pred[pos].mean() if pos.any() else 0.0
        tnr = (~pred[~pos]).mean() if (~pos).any() else 0.0
        acc = 0.5 * (tpr + tnr)
        if acc > best_acc:
            best_t, best_acc = t, acc
    return float(best_t)


def membership_inference(
    g_priv: Graph,
    eval_pairs: LabeledPairs,
    calibration: LabeledPairs | None = None,
) -> dict[str, float]:
    """Accuracy of two edge-membership predictors evaluated on ``eval_pairs``.

    ``baseline`` predicts an edge iff the pair is an edge of ``g_priv``.
    ``common_neighbors`` thresholds the common-neighbour count in ``g_priv``,
    with the threshold tuned on ``calibration`` (a pair set disjoint from the
    evaluation set). Without calibration pairs the second predictor is omitted.
    """
    labels = np.asarray(eval_pairs.labels)
    npos = int(labels.sum())
    if npos * 2 != len(labels):
        raise AttackError("evaluation pairs must be balanced")
    if g_priv.n and eval_pairs.pairs.max() >= g_priv.n:
        raise AttackError("evaluation pairs reference nodes missing from the private graph")
    out = {"baseline": float(np.mean(_has_edge(g_priv, eval_pairs.pairs) == (labels == 1)))}
    if calibration is not None:
        t = best_threshold(common_neighbors(g_priv, calibration.pairs), np.asarray(calibration.labels))
        pred = common_neighbors(g_priv, eval_pairs.pairs) >= t
        out["common_neighbors"] = float(np.mean(pred == (labels == 1)))
    return out


def reconstruction_rae(g_original: Graph, g_reconstructed: Graph) -> float:
    """``||A1 - A2||_F / ||A1||_F`` for 0/1 adjacency matrices."""
    if g_original.n != g_reconstructed.n:
        raise AttackError("graphs must share a node set")
    if g_original.m == 0:
        raise AttackError("original graph has no edges")
    sym = np.setxor1d(g_original.edge_keys(), g_reconstructed.edge_keys()).size
    return math.sqrt(2 * sym) / math.sqrt(2 * g_original.m)


def identity_reconstruction(g_priv: Graph) -> Graph:
    """Baseline reconstruction: take the released edge set at face value."""
    return g_priv


@dataclass(frozen=True)
class NodeMapping:
    """Injective map from private-graph ids (``src``) to original-graph ids (``dst``)."""

    src: np.ndarray
    dst: np.ndarray

    def __post_init__(self):
        if len(self.src) != len(self.dst):
            raise AttackError("mapping arrays differ in length")
        if len(np.unique(self.src)) != len(self.src) or len(np.unique(self.dst)) != len(self.dst):
            raise AttackError("node mapping must be injective")

    @classmethod
    def from_dict(cls, f: dict) -> "NodeMapping":
        items = sorted(f.items())
        return cls(np.array([k for k, _ in items], dtype=np.int64), np.array([v for _, v in items], dtype=np.int64))

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.src.tolist(), self.dst.tolist()))

    def inverse_array(self, n_original: int) -> np.ndarray:
        """``inv[v]`` = private id mapped onto original node ``v``, or -1."""
        inv = np.full(n_original, -1, dtype=np.int64)
        inv[self.dst] = self.src
        return inv


def _signatures(g: Graph) -> list[tuple]:
    deg = degree_sequence(g)
    nbrs = g.neighbors()
    return [(int(deg[v]), tuple(sorted(deg[nbrs[v]].tolist(), reverse=True))) for v in range(g.n)]


def _rank_order(g: Graph) -> list[int]:
    sig = _signatures(g)
    # descending signature; ties keep ascending id
    return sorted(range(g.n), key=lambda v: (tuple(-x for x in (sig[v][0], *sig[v][1])), v))


def seedfree_deanonymize(g_original: Graph, g_priv: Graph) -> NodeMapping:
    """Match nodes rank-wise after sorting both graphs by structural signature.

    The signature of a node is its degree followed by its neighbours' degrees
    in descending order; nodes are compared lexicographically on it.
    """
    if g_original.n == 0 or g_priv.n == 0:
        raise AttackError("graphs must be non-empty")
    a = _rank_order(g_priv)
    b = _rank_order(g_original)
    k = min(len(a), len(b))
    return NodeMapping(np.array(a[:k], dtype=np.int64), np.array(b[:k], dtype=np.int64))


def _conserved(g_original: Graph, g_priv: Graph, f: NodeMapping) -> tuple[int, np.ndarray]:
    inv = f.inverse_array(g_original.n)
    if len(f.src) and f.src.max() >= g_priv.n:
        raise AttackError("mapping refers to nodes outside the private graph")
    mapped = inv[g_original.edges]
    ok = (mapped >= 0).all(axis=1)
    m = np.sort(mapped[ok], axis=1)
    keys = m[:, 0] * g_priv.n + m[:, 1]
    return int(np.isin(keys, g_priv.edge_keys()).sum()), inv


def edge_correctness(g_original: Graph, g_priv: Graph, f: NodeMapping) -> float:
    """Percentage of original edges that land on private edges under ``f``."""
    if g_original.m == 0:
        raise AttackError("original graph has no edges")
    conserved, _ = _conserved(g_original, g_priv, f)
    return 100.0 * conserved / g_original.m


def s3_score(g_original: Graph, g_priv: Graph, f: NodeMapping) -> float:
    """Symmetric substructure score (percent), union-form denominator."""
    conserved, _ = _conserved(g_original, g_priv, f)
    image = np.zeros(g_priv.n, dtype=bool)
    image[f.src] = True
    induced = int((image[g_priv.edges[:, 0]] & image[g_priv.edges[:, 1]]).sum()) if g_priv.m else 0
    denom = g_original.m + induced - conserved
    if denom == 0:
        raise AttackError("S3 undefined: both edge sets are empty under the mapping")
    return 100.0 * conserved / denom
