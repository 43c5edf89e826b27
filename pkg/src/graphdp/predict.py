from __future__ import annotations

import math

import numpy as np

from .graph import Graph
from .metrics.basic import MetricError
from .metrics.centrality import pagerank


def rank_nodes(scores) -> np.ndarray:
    """Node ids by descending score, ties broken by ascending id."""
    scores = np.asarray(scores, dtype=float)
    return np.lexsort((np.arange(len(scores)), -scores))


def dcg(gains, order) -> float:
    gains = np.asarray(gains, dtype=float)
    order = np.asarray(order)
    disc = 1.0 / np.log2(np.arange(2, len(order) + 2))
    return float(np.sum(gains[order] * disc))


def ndcg(true_scores, predicted_scores) -> float:
    """DCG of the predicted ordering, scored with the true gains, over the ideal DCG."""
    true_scores = np.asarray(true_scores, dtype=float)
    ideal = dcg(true_scores, rank_nodes(true_scores))
    if ideal == 0:
        raise MetricError("ideal DCG is zero")
    return dcg(true_scores, rank_nodes(predicted_scores)) / ideal


def pagerank_ndcg(g: Graph, g_priv: Graph) -> float:
    if g.n != g_priv.n:
        raise MetricError(f"node counts differ ({g.n} vs {g_priv.n}); rankings are not comparable")
    return ndcg(pagerank(g), pagerank(g_priv))


def predictive_error(metric_on_g: float, metric_on_gpriv: float) -> float:
    for x in (metric_on_g, metric_on_gpriv):
        if not 0 <= x <= 1:
            raise MetricError(f"predictive metric {x} outside [0, 1]")
    return abs(metric_on_g - metric_on_gpriv)


def advantage_bound(epsilon: float) -> float:
    """Largest advantage over guessing any predictor can have against an eps-DP release."""
    if epsilon < 0:
        raise MetricError("epsilon must be non-negative")
    return math.expm1(epsilon) / 2


def min_epsilon_for_advantage(advantage: float) -> float:
    """Inverse of :func:`advantage_bound`: ``ln(2 adv + 1)``."""
    return math.log1p(2 * advantage)
