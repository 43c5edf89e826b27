"""Experiment runner: privatise, measure, serialise.

For every (epsilon, trial) cell the mechanism runs once on its own random
stream, then each selected metric compares the private graph with the
original. Metrics whose preconditions fail are skipped with a recorded
reason rather than aborting the run.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import statistics
import tempfile
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .. import attacks as atk
from ..dp import make_rng
from ..gcn import GcnConfig, GcnError, gcn_train_eval
from ..graph import Graph, GraphError, load_edge_list
from ..mechanisms import get_mechanism
from ..metrics import (
    MetricError,
    ari,
    assortativity,
    betweenness,
    closeness,
    clustering_coefficients,
    density,
    error,
    harmonic_diameter,
    is_undefined,
    louvain,
    modularity,
    wasserstein1,
)
from ..predict import pagerank_ndcg, predictive_error
from ..simulate import CascadeConfig, CascadeError, influence_spread
from .config import ExperimentConfig
from .synth import synth_dataset

log = logging.getLogger(__name__)

CSV_HEADER = ("dataset", "mechanism", "epsilon", "trial", "metric", "value", "error_kind")

# stream ids under base_seed
MECHANISM_STREAM = 0
METRIC_STREAM = 1
ATTACK_STREAM = 2
RUN_STREAM = 99

SKIPPABLE = (MetricError, GraphError, CascadeError, GcnError, atk.AttackError)


class Skip(Exception):
    """A metric does not apply to this pair of graphs."""


def _stream_id(name: str) -> int:
    return zlib.crc32(name.encode())


class View:
    """A graph plus lazily computed metric inputs."""

    def __init__(self, g: Graph, cfg: ExperimentConfig, seed_path: tuple):
        self.g = g
        self.cfg = cfg
        self.seed_path = seed_path
        self._cache: dict = {}

    def rng(self, name: str) -> np.random.Generator:
        return make_rng(self.cfg.base_seed, *self.seed_path, _stream_id(name))

    def get(self, key: str, fn: Callable):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def degrees(self):
        return self.get("degree", lambda: self.g.degrees().astype(float))

    def clustering(self):
        return self.get("clustering", lambda: clustering_coefficients(self.g))

    def betweenness(self):
        c = self.cfg
        return self.get(
            "betweenness",
            lambda: betweenness(self.g, c.centrality_mode, c.centrality_rel_error, self.rng("betweenness")).values,
        )

    def closeness(self):
        c = self.cfg
        return self.get(
            "closeness",
            lambda: closeness(self.g, c.centrality_mode, c.centrality_rel_error, self.rng("closeness")).values,
        )

    def partition(self):
        return self.get("louvain", lambda: louvain(self.g, self.rng("louvain")))

    def modularity(self):
        return self.get("modularity", lambda: modularity(self.g, self.partition()))

    def assortativity(self):
        def f():
            r = assortativity(self.g)
            if is_undefined(r):
                raise MetricError("assortativity undefined (zero endpoint-degree variance)")
            return r

        return self.get("assortativity", f)


def _same_nodes(o: View, p: View) -> None:
    if o.g.n != p.g.n:
        raise Skip(f"node count changed ({o.g.n} -> {p.g.n}); metric needs aligned node ids")


def _cascade_cfg(cfg: ExperimentConfig) -> CascadeConfig:
    return CascadeConfig(**cfg.cascade)


def _gcn_cfg(cfg: ExperimentConfig) -> GcnConfig:
    d = dict(cfg.gcn)
    if "split" in d:
        d["split"] = tuple(d["split"])
    d.setdefault("seed", cfg.base_seed)
    return GcnConfig(**d)


def _spread(v: View, run: "RunContext") -> float:
    cc = _cascade_cfg(v.cfg)
    return v.get("spread", lambda: influence_spread(v.g, cc, run.cascade_seed))


def _gcn(v: View, task: str, run: "RunContext"):
    if task == "node-classification" and (v.g.labels is None or v.g.features is None):
        raise Skip("node classification needs node labels and features")
    split = None if v is run.original else run.original_split(task)
    return v.get("gcn-" + task, lambda: gcn_train_eval(v.g, task, _gcn_cfg(v.cfg), split))


def _m_modularity(o, p, run):
    return error("absolute", o.modularity(), p.modularity())


def _m_ari(o, p, run):
    _same_nodes(o, p)
    return ari(o.partition(), p.partition())


def _m_ndcg(o, p, run):
    _same_nodes(o, p)
    return pagerank_ndcg(o.g, p.g)


def _m_link(o, p, run):
    _same_nodes(o, p)
    return predictive_error(_gcn(o, "link-prediction", run).value, _gcn(p, "link-prediction", run).value)


def _m_node_cls(o, p, run):
    _same_nodes(o, p)
    return predictive_error(
        _gcn(o, "node-classification", run).value, _gcn(p, "node-classification", run).value
    )


@dataclass(frozen=True)
class MetricSpec:
    kind: str
    fn: Callable


METRICS: dict[str, MetricSpec] = {
    "num_nodes": MetricSpec("relative", lambda o, p, r: error("relative", o.g.n, p.g.n)),
    "num_edges": MetricSpec("relative", lambda o, p, r: error("relative", o.g.m, p.g.m)),
    "degree": MetricSpec("wasserstein", lambda o, p, r: wasserstein1(o.degrees(), p.degrees())),
    "clustering": MetricSpec("wasserstein", lambda o, p, r: wasserstein1(o.clustering(), p.clustering())),
    "betweenness": MetricSpec("wasserstein", lambda o, p, r: wasserstein1(o.betweenness(), p.betweenness())),
    "closeness": MetricSpec("wasserstein", lambda o, p, r: wasserstein1(o.closeness(), p.closeness())),
    "density": MetricSpec("absolute", lambda o, p, r: error("absolute", density(o.g), density(p.g))),
    "harmonic_diameter": MetricSpec(
        "relative", lambda o, p, r: error("relative", harmonic_diameter(o.g), harmonic_diameter(p.g))
    ),
    "assortativity": MetricSpec(
        "absolute", lambda o, p, r: error("absolute", o.assortativity(), p.assortativity())
    ),
    "modularity": MetricSpec("absolute", _m_modularity),
    "ari": MetricSpec("raw", _m_ari),
    "influence_spread": MetricSpec("absolute", lambda o, p, r: abs(_spread(o, r) - _spread(p, r))),
    "pagerank_ndcg": MetricSpec("raw", _m_ndcg),
    "link_prediction": MetricSpec("absolute", _m_link),
    "node_classification": MetricSpec("absolute", _m_node_cls),
}


def _a_membership(o, p, run):
    _same_nodes(o, p)
    ev, cal = run.attack_pairs()
    acc = atk.membership_inference(p.g, ev, cal)
    return {"mi_baseline_accuracy": acc["baseline"], "mi_common_neighbors_accuracy": acc["common_neighbors"]}


def _a_reconstruction(o, p, run):
    _same_nodes(o, p)
    return {"reconstruction_rae": atk.reconstruction_rae(o.g, atk.identity_reconstruction(p.g))}


def _a_deanon(o, p, run):
    f = atk.seedfree_deanonymize(o.g, p.g)
    return {"edge_correctness": atk.edge_correctness(o.g, p.g, f), "s3": atk.s3_score(o.g, p.g, f)}


ATTACKS: dict[str, tuple[tuple[str, ...], Callable]] = {
    "membership_inference": (("mi_baseline_accuracy", "mi_common_neighbors_accuracy"), _a_membership),
    "reconstruction": (("reconstruction_rae",), _a_reconstruction),
    "deanonymization": (("edge_correctness", "s3"), _a_deanon),
}

# preferred direction for comparison tables: +1 higher is better, -1 lower is better
RAW_DIRECTION = {
    "ari": 1,
    "pagerank_ndcg": 1,
    "mi_baseline_accuracy": -1,
    "mi_common_neighbors_accuracy": -1,
    "reconstruction_rae": 1,
    "edge_correctness": -1,
    "s3": -1,
}


def load_dataset(cfg: ExperimentConfig) -> Graph:
    ds = cfg.dataset
    if "path" in ds:
        return load_edge_list(ds["path"], ds.get("features"), ds.get("labels")).graph
    seed = ds.get("seed", cfg.base_seed)
    return synth_dataset(ds["synthetic"], make_rng(seed, RUN_STREAM, 0))


class RunContext:
    """Run-wide state shared by all cells: original graph and its cached measurements."""

    def __init__(self, cfg: ExperimentConfig, g: Graph | None = None):
        self.cfg = cfg
        self.graph = g if g is not None else load_dataset(cfg)
        self.original = View(self.graph, cfg, (RUN_STREAM, 1))
        self.cascade_seed = np.random.SeedSequence(cfg.base_seed, spawn_key=(RUN_STREAM, 2))
        self.mechanism = get_mechanism(cfg.mechanism["id"]) if cfg.mechanism else None
        self.mech_options = dict(cfg.mechanism.get("params", {}))
        self._pairs = None

    def original_split(self, task: str):
        return _gcn(self.original, task, self).split

    def attack_pairs(self):
        if self._pairs is None:
            rng = make_rng(self.cfg.base_seed, RUN_STREAM, 3)
            both = atk.balanced_pairs(self.graph, self.cfg.attack_pairs, rng)
            pos = np.flatnonzero(both.labels == 1)
            neg = np.flatnonzero(both.labels == 0)
            h = len(pos) // 2
            ev = np.concatenate([pos[:h], neg[:h]])
            cal = np.concatenate([pos[h:], neg[h : len(pos)]])
            if h == 0:
                raise Skip("too few edges to build disjoint evaluation and calibration pairs")
            self._pairs = (
                atk.LabeledPairs(both.pairs[ev], both.labels[ev]),
                atk.LabeledPairs(both.pairs[cal], both.labels[cal]),
            )
        return self._pairs

    def privatize(self, eps_index: int, trial: int) -> Graph:
        eps = self.cfg.epsilons[eps_index]
        params = self.mechanism.params(eps, self.cfg.delta)
        rng = make_rng(self.cfg.base_seed, eps_index, trial, MECHANISM_STREAM)
        out = self.mechanism.fn(self.graph, params, rng, **self.mech_options)
        if self.mechanism.preserves_nodes and out.n == self.graph.n and out.labels is None:
            # node ids align, so public node data carries over
            out = out.with_features(
                out.features if out.features is not None else self.graph.features, self.graph.labels
            )
        return out


@dataclass
class CellResult:
    eps_index: int
    trial: int
    rows: list = field(default_factory=list)  # (metric, value, kind)
    skipped: list = field(default_factory=list)  # (metric, reason)
    attack_rows: int = 0


def run_cell(run: RunContext, eps_index: int, trial: int) -> CellResult:
    cfg = run.cfg
    res = CellResult(eps_index, trial)
    g_priv = run.privatize(eps_index, trial)
    priv = View(g_priv, cfg, (eps_index, trial, METRIC_STREAM))
    for name in cfg.metrics:
        spec = METRICS[name]
        try:
            value = spec.fn(run.original, priv, run)
        except (Skip, *SKIPPABLE) as exc:
            res.skipped.append((name, str(exc)))
            log.info("eps=%s trial=%d: skipped %s: %s", cfg.epsilons[eps_index], trial, name, exc)
            continue
        res.rows.append((name, float(value), spec.kind))
    if cfg.epsilons[eps_index] in cfg.attack_epsilons:
        for name in cfg.attacks:
            names, fn = ATTACKS[name]
            try:
                out = fn(run.original, priv, run)
            except (Skip, *SKIPPABLE) as exc:
                res.skipped.append((name, str(exc)))
                continue
            for metric in names:
                res.rows.append((metric, float(out[metric]), "raw"))
                res.attack_rows += 1
    return res


_WORKER_RUN: RunContext | None = None


def _worker_init(cfg_dict):
    global _WORKER_RUN
    _WORKER_RUN = RunContext(ExperimentConfig.from_dict(cfg_dict))


def _worker_cell(args):
    return run_cell(_WORKER_RUN, *args)


def _fmt(x: float) -> str:
    return repr(float(x))


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def aggregate(rows) -> list[dict]:
    """Mean and sample standard deviation per (metric, epsilon)."""
    groups: dict[tuple, list] = {}
    kinds = {}
    for r in rows:
        groups.setdefault((r["metric"], r["epsilon"]), []).append(r["value"])
        kinds[r["metric"]] = r["error_kind"]
    out = []
    for (metric, eps), vals in sorted(groups.items()):
        out.append(
            {
                "metric": metric,
                "error_kind": kinds[metric],
                "epsilon": eps,
                "count": len(vals),
                "mean": statistics.fmean(vals),
                "std": statistics.stdev(vals) if len(vals) > 1 else None,
            }
        )
    return out


@dataclass
class RunResult:
    out_dir: Path
    rows: list
    aggregate: list
    manifest: dict


def run_experiment(cfg: ExperimentConfig, graph: Graph | None = None) -> RunResult:
    """Run the full (epsilon x trial) grid and write ``results.csv``,
    ``aggregate.json`` and ``manifest.json`` under ``cfg.output_dir``."""
    for name in cfg.metrics:
        if name not in METRICS:
            raise KeyError(f"unknown metric {name!r}; choose from {sorted(METRICS)}")
    for name in cfg.attacks:
        if name not in ATTACKS:
            raise KeyError(f"unknown attack {name!r}; choose from {sorted(ATTACKS)}")
    cells = [(i, t) for i in range(len(cfg.epsilons)) for t in range(cfg.trials)]
    if cfg.workers > 1 and graph is None:
        with ProcessPoolExecutor(cfg.workers, initializer=_worker_init, initargs=(cfg.to_dict(),)) as ex:
            results = list(ex.map(_worker_cell, cells))
    else:
        run = RunContext(cfg, graph)
        results = [run_cell(run, i, t) for i, t in cells]
    results.sort(key=lambda r: (r.eps_index, r.trial))

    dataset, mech = cfg.dataset_name, cfg.mechanism["id"]
    rows = []
    skipped = []
    for r in results:
        eps = cfg.epsilons[r.eps_index]
        for metric, value, kind in r.rows:
            rows.append(
                {"dataset": dataset, "mechanism": mech, "epsilon": eps, "trial": r.trial,
                 "metric": metric, "value": value, "error_kind": kind}
            )
        skipped.extend({"epsilon": eps, "trial": r.trial, "metric": m, "reason": why} for m, why in r.skipped)

    attack_rows = sum(r.attack_rows for r in results)
    metric_rows = len(rows) - attack_rows
    expected_metric_rows = len(cfg.metrics) * len(cells) - sum(
        1 for s in skipped if s["metric"] in METRICS
    )
    if metric_rows != expected_metric_rows:
        raise RuntimeError(f"row count mismatch: {metric_rows} != {expected_metric_rows}")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r["dataset"], r["mechanism"], _fmt(r["epsilon"]), r["trial"], r["metric"],
                    _fmt(r["value"]), r["error_kind"]])
    agg = aggregate(rows)
    manifest = {
        "dataset": dataset,
        "mechanism": mech,
        "epsilons": cfg.epsilons,
        "trials": cfg.trials,
        "private_graphs": len(results),
        "rows": len(rows),
        "metric_rows": metric_rows,
        "attack_rows": attack_rows,
        "skipped": skipped,
        "config": cfg.to_dict(),
    }
    out = Path(cfg.output_dir)
    atomic_write(out / "results.csv", buf.getvalue())
    atomic_write(
        out / "aggregate.json",
        json.dumps({"dataset": dataset, "mechanism": mech, "rows": agg}, indent=2, sort_keys=True) + "\n",
    )
    atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return RunResult(out, rows, agg, manifest)


def read_results_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {**r, "epsilon": float(r["epsilon"]), "trial": int(r["trial"]), "value": float(r["value"])}
            for r in csv.DictReader(fh)
        ]


def compare_graphs(g: Graph, g_priv: Graph, metrics, cfg: ExperimentConfig | None = None):
    """One-shot metric comparison between an original and a private graph."""
    from ..metrics.report import MetricReport

    cfg = cfg or ExperimentConfig(dataset={"synthetic": {}}, mechanism={"id": "edge-rr"}, trials=1)
    run = RunContext(cfg, g)
    priv = View(g_priv, cfg, (0, 0, METRIC_STREAM))
    report = MetricReport()
    for name in metrics:
        spec = METRICS[name]
        try:
            report.add(name, spec.fn(run.original, priv, run), spec.kind)
        except (Skip, *SKIPPABLE) as exc:
            report.skip(name, str(exc))
    return report



def run_attack(g: Graph, g_priv: Graph, name: str, cfg: ExperimentConfig | None = None) -> dict[str, float]:
    """Evaluate one registered attack on a single (original, private) pair."""
    if name not in ATTACKS:
        raise KeyError(f"unknown attack {name!r}; choose from {sorted(ATTACKS)}")
    cfg = cfg or ExperimentConfig(dataset={"synthetic": {}}, mechanism={"id": "edge-rr"}, trials=1)
    run = RunContext(cfg, g)
    try:
        return ATTACKS[name][1](run.original, View(g_priv, cfg, (0, 0, ATTACK_STREAM)), run)
    except Skip as exc:
        raise atk.AttackError(str(exc)) from None
