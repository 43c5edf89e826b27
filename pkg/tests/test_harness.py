import csv
import json
import statistics

import numpy as np
import pytest
from scipy.sparse import csgraph

from graphdp.dp import make_rng
from graphdp.harness import (
    CompareError,
    ConfigError,
    ExperimentConfig,
    compare_report,
    compare_rows,
    run_experiment,
    synth_dataset,
)
from graphdp.harness.config import DEFAULT_EPSILONS
from graphdp.harness.runner import CSV_HEADER, read_results_csv
from graphdp.harness.synth import powerlaw_weights
from graphdp.graph import GraphError
from graphdp.metrics import density

from conftest import complete

SMALL = {"synthetic": {"generator": "planted", "n": 40, "p_in": 0.3, "p_out": 0.03, "features": 4}}


def cfg(tmp_path, **kw):
    base = dict(dataset=SMALL, mechanism={"id": "edge-rr"}, epsilons=[1.0, 4.0], trials=2,
                metrics=["density"], output_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig.from_dict(base)


# config


def test_config_defaults():
    c = ExperimentConfig(dataset=SMALL, mechanism={"id": "edge-rr"})
    assert c.epsilons == list(DEFAULT_EPSILONS) and len(c.epsilons) == 12
    assert c.trials == 10
    assert c.attack_epsilons == [1.0, 3.0, 9.0]


@pytest.mark.parametrize(
    "bad",
    [
        {"epsilons": [1, 1]},
        {"epsilons": [2, 1]},
        {"epsilons": [0, 1]},
        {"trials": 0},
        {"attacks": ["reconstruction"], "attack_epsilons": [5.0]},
        {"mechanism": {}},
        {"dataset": {}},
        {"centrality_mode": "approximate"},
        {"bogus_key": 1},
        {"preset": "scenario9"},
    ],
)
def test_config_validation(tmp_path, bad):
    with pytest.raises(ConfigError):
        cfg(tmp_path, **bad)


def test_config_preset_and_json(tmp_path):
    (tmp_path / "g.txt").write_text("0 1\n1 2\n")
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"preset": "scenario2", "dataset": {"path": "g.txt"}, "mechanism": {"id": "pi-v"}}))
    c = ExperimentConfig.from_json(p, trials=3, epsilons=None)
    assert c.trials == 3
    assert "num_nodes" in c.metrics and c.attacks == ["deanonymization"]
    assert c.dataset["path"] == str(tmp_path / "g.txt")
    assert c.dataset_name == "g"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(p)


# synthetic data


def test_synth_er_complete():
    assert synth_dataset({"generator": "er", "n": 100, "p": 1.0}, make_rng(0)) == complete(100)


def test_synth_planted_two_components():
    g = synth_dataset({"generator": "planted", "n": 60, "p_in": 0.5, "p_out": 0.0}, make_rng(1))
    k, _ = csgraph.connected_components(g.adjacency(), directed=False)
    assert k == 2
    assert g.labels.tolist() == [0] * 30 + [1] * 30


def test_synth_powerlaw_mean_degree():
    spec = {"generator": "powerlaw-cl", "n": 2000, "exponent": 2.5, "mean_degree": 10}
    rng = make_rng(2)
    means = [2 * synth_dataset(spec, rng).m / 2000 for _ in range(20)]
    assert abs(np.mean(means) - 10) <= 1.0
    w = powerlaw_weights(2000, 2.5, 10)
    assert w.mean() == pytest.approx(10)
    assert w.max() <= np.sqrt(w.sum()) * (1 + 1e-9)


def test_synth_unsupported():
    with pytest.raises(GraphError):
        synth_dataset({"generator": "ba", "n": 10}, make_rng(0))
    with pytest.raises(GraphError):
        synth_dataset({"generator": "er", "n": 0, "p": 0.1}, make_rng(0))


# runner


def test_private_graph_count(tmp_path):
    c = cfg(tmp_path, epsilons=list(DEFAULT_EPSILONS), trials=10)
    res = run_experiment(c)
    assert res.manifest["private_graphs"] == 120
    assert res.manifest["rows"] == 120


def test_identity_limit_density(tmp_path):
    c = cfg(tmp_path, epsilons=[60.0], trials=1)
    res = run_experiment(c)
    assert len(res.rows) == 1
    row = res.rows[0]
    assert (row["metric"], row["value"], row["error_kind"]) == ("density", 0.0, "absolute")


def test_csv_format_and_determinism(tmp_path):
    a = run_experiment(cfg(tmp_path, output_dir=str(tmp_path / "a"), metrics=["density", "degree", "modularity"]))
    b = run_experiment(cfg(tmp_path, output_dir=str(tmp_path / "b"), metrics=["density", "degree", "modularity"]))
    ta = (a.out_dir / "results.csv").read_bytes()
    assert ta == (b.out_dir / "results.csv").read_bytes()
    header = ta.decode().splitlines()[0]
    assert header == ",".join(CSV_HEADER) == "dataset,mechanism,epsilon,trial,metric,value,error_kind"


def test_parallel_matches_serial(tmp_path):
    kw = dict(metrics=["density", "clustering"])
    a = run_experiment(cfg(tmp_path, output_dir=str(tmp_path / "s"), **kw))
    b = run_experiment(cfg(tmp_path, output_dir=str(tmp_path / "p"), workers=2, **kw))
    assert (a.out_dir / "results.csv").read_bytes() == (b.out_dir / "results.csv").read_bytes()


def test_adding_metrics_keeps_mechanism_stream(tmp_path):
    a = run_experiment(cfg(tmp_path, output_dir=str(tmp_path / "a")))
    b = run_experiment(cfg(tmp_path, output_dir=str(tmp_path / "b"), metrics=["degree", "density", "betweenness"]))
    da = [r["value"] for r in a.rows if r["metric"] == "density"]
    db = [r["value"] for r in b.rows if r["metric"] == "density"]
    assert da == db


def test_aggregate_self_consistent(tmp_path):
    res = run_experiment(cfg(tmp_path, metrics=["density", "degree"], trials=3))
    raw = read_results_csv(res.out_dir / "results.csv")
    agg = json.loads((res.out_dir / "aggregate.json").read_text())["rows"]
    for a in agg:
        vals = [r["value"] for r in raw if r["metric"] == a["metric"] and r["epsilon"] == a["epsilon"]]
        assert a["count"] == len(vals) == 3
        assert a["mean"] == statistics.fmean(vals)
        assert a["std"] == statistics.stdev(vals)


def test_row_count_with_attacks_and_skips(tmp_path):
    c = cfg(
        tmp_path,
        mechanism={"id": "pi-v"},
        epsilons=[1.0, 3.0, 9.0, 12.0],
        metrics=["num_nodes", "density", "pagerank_ndcg", "ari"],
        attacks=["deanonymization", "membership_inference"],
    )
    res = run_experiment(c)
    m = res.manifest
    cells = 4 * 2
    skipped_metrics = [s for s in m["skipped"] if s["metric"] in ("pagerank_ndcg", "ari")]
    assert len(skipped_metrics) == 2 * cells
    assert all("node count" in s["reason"] for s in skipped_metrics)
    # membership inference needs aligned nodes too
    assert sum(s["metric"] == "membership_inference" for s in m["skipped"]) == 3 * 2
    assert m["metric_rows"] == 2 * cells
    assert m["attack_rows"] == 2 * 3 * 2  # two scores, three attack epsilons, two trials
    assert m["rows"] == m["metric_rows"] + m["attack_rows"]
    with open(res.out_dir / "results.csv") as fh:
        assert sum(1 for _ in csv.reader(fh)) == m["rows"] + 1


def test_scenario1_metrics_run(tmp_path):
    c = ExperimentConfig.from_dict(dict(
        dataset=SMALL, mechanism={"id": "edge-rr"}, preset="scenario1", epsilons=[1.0, 3.0], trials=1,
        attack_epsilons=[1.0], cascade={"num_sims": 30}, gcn={"epochs": 10, "hidden_dim": 8, "out_dim": 8},
        attack_pairs=50, output_dir=str(tmp_path / "s1"),
    ))
    res = run_experiment(c)
    got = {r["metric"] for r in res.rows}
    assert {"influence_spread", "pagerank_ndcg", "link_prediction", "node_classification"} <= got
    assert {"mi_baseline_accuracy", "mi_common_neighbors_accuracy", "reconstruction_rae"} <= got
    assert res.manifest["skipped"] == []


def test_unknown_metric(tmp_path):
    with pytest.raises(KeyError):
        run_experiment(cfg(tmp_path, metrics=["nope"]))


# comparison


def _write(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerows(rows)
    return path


def test_compare_single_equals_aggregate(tmp_path):
    res = run_experiment(cfg(tmp_path, metrics=["density", "degree"], trials=3))
    table = compare_report([res.out_dir])
    assert [(t["metric"], t["epsilon"], t["mean"], t["std"]) for t in table] == [
        (a["metric"], a["epsilon"], a["mean"], a["std"]) for a in res.aggregate
    ]
    assert all(t["best"] for t in table)


def test_compare_identical_all_ties(tmp_path):
    rows = [["d", "m", "1.0", "0", "density", "0.5", "absolute"], ["d", "m", "1.0", "1", "density", "0.7", "absolute"]]
    a = _write(tmp_path / "a.csv", rows)
    b = _write(tmp_path / "b.csv", [[*r[:1], "k", *r[2:]] for r in rows])
    table = compare_report([a, b])
    assert table[0]["mean"] == table[1]["mean"]
    # tie goes to the lexicographically smaller id
    assert [(t["mechanism"], t["best"]) for t in table] == [("k", True), ("m", False)]


def test_compare_hand_fixture(tmp_path):
    a = _write(tmp_path / "a.csv", [
        ["d", "alpha", "1.0", "0", "density", "0.2", "absolute"],
        ["d", "alpha", "1.0", "1", "density", "0.4", "absolute"],
        ["d", "alpha", "2.0", "0", "ari", "0.5", "raw"],
        ["d", "alpha", "2.0", "1", "ari", "0.7", "raw"],
    ])
    b = _write(tmp_path / "b.csv", [
        ["d", "beta", "1.0", "0", "density", "0.1", "absolute"],
        ["d", "beta", "1.0", "1", "density", "0.1", "absolute"],
        ["d", "beta", "2.0", "0", "ari", "0.1", "raw"],
        ["d", "beta", "2.0", "1", "ari", "0.3", "raw"],
    ])
    t = {(r["metric"], r["mechanism"]): r for r in compare_report([a, b], tmp_path / "cmp.csv")}
    assert t["density", "alpha"]["mean"] == pytest.approx(0.3)
    assert t["density", "alpha"]["std"] == pytest.approx(0.1414213562, rel=1e-9)
    assert t["density", "beta"]["std"] == 0
    assert t["density", "beta"]["best"] and not t["density", "alpha"]["best"]  # lower error wins
    assert t["ari", "alpha"]["best"] and not t["ari", "beta"]["best"]  # higher agreement wins
    assert t["ari", "beta"]["mean"] == pytest.approx(0.2)
    lines = (tmp_path / "cmp.csv").read_text().splitlines()
    assert lines[0] == "dataset,metric,error_kind,epsilon,mechanism,mean,std,best"
    assert len(lines) == 5


def test_compare_disjoint_grids(tmp_path):
    a = _write(tmp_path / "a.csv", [["d", "x", "1.0", "0", "density", "0.2", "absolute"]])
    b = _write(tmp_path / "b.csv", [["d", "y", "2.0", "0", "density", "0.2", "absolute"]])
    with pytest.raises(CompareError):
        compare_report([a, b])
    with pytest.raises(CompareError):
        compare_rows([])
