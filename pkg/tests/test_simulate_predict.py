import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse import csgraph, coo_matrix

from graphdp.dp import make_rng
from graphdp.graph import Graph, erdos_renyi, relabel
from graphdp.metrics import MetricError, pagerank
from graphdp.predict import (
    advantage_bound,
    dcg,
    min_epsilon_for_advantage,
    ndcg,
    pagerank_ndcg,
    predictive_error,
    rank_nodes,
)
from graphdp.simulate import (
    CascadeConfig,
    CascadeError,
    cascade_runs,
    independent_cascade,
    influence_spread,
    select_seeds,
    spread_error,
)

from conftest import complete, graphs, star


def exact_spread(g, seeds, p):
    """Sum over all 2^m live-edge worlds."""
    total = 0.0
    for mask in itertools.product([0, 1], repeat=g.m):
        live = g.edges[np.array(mask, bool)] if g.m else np.empty((0, 2), int)
        a = coo_matrix((np.ones(len(live)), (live[:, 0], live[:, 1])), shape=(g.n, g.n))
        _, lab = csgraph.connected_components(a, directed=False)
        active = np.isin(lab, lab[list(seeds)]).sum()
        k = sum(mask)
        total += p**k * (1 - p) ** (g.m - k) * active / g.n
    return total


def test_cascade_examples(path3):
    assert independent_cascade(path3, [0], CascadeConfig(1.0, num_sims=10), make_rng(0)) == 1.0
    g = erdos_renyi(30, 0.3, make_rng(1))
    assert independent_cascade(g, [0, 5], CascadeConfig(0.0, num_sims=10), make_rng(0)) == 2 / 30


def test_cascade_star_expectation():
    runs = cascade_runs(star(5), [0], CascadeConfig(0.5, num_sims=10**5), make_rng(2))
    assert abs(runs.mean() * 5 - 3.0) < 0.03


def _fixtures():
    rng = np.random.default_rng(123)
    out = []
    while len(out) < 20:
        n = int(rng.integers(3, 9))
        iu = np.triu_indices(n, 1)
        mask = rng.random(len(iu[0])) < 0.4
        g = Graph(n, np.stack([iu[0][mask], iu[1][mask]], axis=1))
        if 1 <= g.m <= 12:
            out.append((g, float(rng.uniform(0.1, 0.9)), int(rng.integers(n))))
    return out


@pytest.mark.parametrize("g,p,seed_node", _fixtures())
def test_cascade_matches_live_edge_enumeration(g, p, seed_node):
    sims = 4000
    runs = cascade_runs(g, [seed_node], CascadeConfig(p, num_sims=sims), make_rng(seed_node))
    exact = exact_spread(g, [seed_node], p)
    se = runs.std(ddof=1) / math.sqrt(sims)
    assert abs(runs.mean() - exact) <= 3 * se + 1e-12


@given(graphs(min_n=2, max_n=15), st.integers(0, 1000))
def test_cascade_fraction_bounds_and_monotone(g, seed):
    seeds = [0]
    lo = independent_cascade(g, seeds, CascadeConfig(0.2, num_sims=50), make_rng(seed))
    hi = independent_cascade(g, seeds, CascadeConfig(0.6, num_sims=50), make_rng(seed))
    assert 1 / g.n - 1e-12 <= lo <= 1 + 1e-12 and 1 / g.n - 1e-12 <= hi <= 1 + 1e-12
    # paired uniforms: an edge live at p=0.2 is live at p=0.6
    assert hi >= lo - 1e-12


def test_cascade_errors():
    with pytest.raises(CascadeError):
        CascadeConfig(1.5)
    with pytest.raises(CascadeError):
        cascade_runs(star(3), [], CascadeConfig(), make_rng(0))
    with pytest.raises(CascadeError):
        cascade_runs(star(3), [7], CascadeConfig(), make_rng(0))


def test_select_seeds_star_center():
    assert select_seeds(star(10), 0.1, make_rng(0), CascadeConfig(0.5, num_sims=200)) == [0]


def test_select_seeds_one_per_component():
    g = Graph.from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    seeds = select_seeds(g, 2 / 6, make_rng(0), CascadeConfig(1.0, num_sims=5))
    assert len(seeds) == 2
    assert {s // 3 for s in seeds} == {0, 1}


def test_select_seeds_all():
    assert select_seeds(star(4), 1.0, make_rng(0)) == [0, 1, 2, 3]


def test_spread_error_examples():
    g = erdos_renyi(40, 0.1, make_rng(3))
    cfg = CascadeConfig(0.3, 0.05, 50)
    assert spread_error(g, g, cfg, make_rng(4)) == 0
    assert spread_error(g, erdos_renyi(40, 0.2, make_rng(5)), CascadeConfig(0.0, 0.05, 20), make_rng(4)) == 0
    n = 10
    path = Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    empty = Graph(n, np.empty((0, 2), int))
    err = spread_error(path, empty, CascadeConfig(1.0, 0.1, 5), make_rng(6))
    assert err == pytest.approx(1 - 1 / n)


def test_influence_spread_deterministic():
    g = erdos_renyi(50, 0.1, make_rng(7))
    cfg = CascadeConfig(0.2, 0.04, 100)
    ss = np.random.SeedSequence(3)
    assert influence_spread(g, cfg, ss) == influence_spread(g, cfg, ss)


# ranking quality


def test_rank_nodes_tie_break():
    assert rank_nodes([0.2, 0.5, 0.2, 0.5]).tolist() == [1, 3, 0, 2]


def test_ndcg_reversed_three_nodes():
    gains = np.array([0.5, 0.3, 0.2])
    ideal = 0.5 + 0.3 / math.log2(3) + 0.2 / 2
    reversed_ = 0.2 + 0.3 / math.log2(3) + 0.5 / 2
    assert dcg(gains, [2, 1, 0]) == pytest.approx(reversed_)
    assert ndcg(gains, [0.1, 0.2, 0.3]) == pytest.approx(reversed_ / ideal)


@given(graphs(min_n=2, max_n=30))
def test_ndcg_self_is_one(g):
    assert pagerank_ndcg(g, g) == 1.0


@given(st.lists(st.floats(0.01, 1), min_size=2, max_size=30), st.integers(0, 100), st.floats(0.1, 100))
def test_ndcg_invariant_to_scaling_prediction(true, seed, c):
    pred = np.random.default_rng(seed).random(len(true))
    assert ndcg(true, pred) == ndcg(true, pred * c)
    assert 0 < ndcg(true, pred) <= 1 + 1e-12


def test_ndcg_tie_break_on_equal_scores():
    g = complete(5)
    assert pagerank_ndcg(g, g) == 1.0
    assert ndcg(np.ones(5), np.ones(5)) == 1.0


def test_pagerank_ndcg_rejects_node_change():
    with pytest.raises(MetricError):
        pagerank_ndcg(complete(3), complete(4))


def test_predictive_error_examples():
    assert predictive_error(0.9, 0.9) == 0
    assert predictive_error(0.9, 0.6) == pytest.approx(0.3)
    assert predictive_error(0.2, 0.7) == predictive_error(0.7, 0.2)
    with pytest.raises(MetricError):
        predictive_error(1.2, 0.1)


def test_advantage_bound_examples():
    assert advantage_bound(0) == 0
    assert advantage_bound(math.log(3)) == pytest.approx(1)
    assert advantage_bound(1) == pytest.approx(0.8591409142295225, rel=1e-14)
    assert min_epsilon_for_advantage(advantage_bound(2.5)) == pytest.approx(2.5)


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0, 1))
def test_advantage_bound_convex_increasing(a, b, t):
    lo, hi = sorted((a, b))
    assert advantage_bound(lo) <= advantage_bound(hi)
    mid = t * a + (1 - t) * b
    assert advantage_bound(mid) <= t * advantage_bound(a) + (1 - t) * advantage_bound(b) + 1e-9 * (1 + advantage_bound(max(a, b)))
