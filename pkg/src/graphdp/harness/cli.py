"""Command-line entry point: ``graphdp <run|metrics|attack|compare|synth>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..attacks import AttackError
from ..dp import make_rng
from ..graph import Graph, GraphError, load_edge_list, write_edge_list
from ..metrics import MetricError
from .compare import CompareError, compare_report, format_table
from .config import DESCRIPTIVE, ConfigError, ExperimentConfig
from .runner import ATTACKS, METRICS, compare_graphs, run_attack, run_experiment
from .synth import synth_dataset

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_graph_pair(path_a, path_b) -> tuple[Graph, Graph]:
    """Load two edge lists into one id space.

    Node labels of the second file that also occur in the first get the
    first file's ids, so node-aligned metrics compare the same nodes.
    """
    a = load_edge_list(path_a)
    b = load_edge_list(path_b)
    ids = dict(a.id_map)
    for label in b.id_map:
        ids.setdefault(label, len(ids))
    inv_b = {v: ids[k] for k, v in b.id_map.items()}
    remap = np.array([inv_b[i] for i in range(b.graph.n)], dtype=np.int64)
    edges = remap[b.graph.edges] if b.graph.m else b.graph.edges
    n_b = max(b.graph.n, int(remap.max()) + 1)
    return a.graph, Graph.from_edges(n_b, edges.tolist())


def _parse_spec(text: str) -> dict:
    p = Path(text)
    raw = p.read_text(encoding="utf-8") if p.exists() else text
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--spec is neither a JSON file nor a JSON object: {exc}") from None
    if not isinstance(spec, dict):
        raise UsageError("--spec must be a JSON object")
    return spec


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(
        args.config, epsilons=args.epsilons, trials=args.trials, base_seed=args.seed,
        output_dir=args.out, workers=args.workers,
    )
    res = run_experiment(cfg)
    m = res.manifest
    print(f"{m['private_graphs']} private graphs, {m['rows']} rows, {len(m['skipped'])} skipped -> {res.out_dir}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    if len(args.graph) != 2:
        raise UsageError("metrics needs exactly two --graph arguments")
    names = args.metric or ["num_nodes", "num_edges", *DESCRIPTIVE]
    unknown = [m for m in names if m not in METRICS]
    if unknown:
        raise UsageError(f"unknown metrics {unknown}; choose from {sorted(METRICS)}")
    g, h = read_graph_pair(*args.graph)
    report = compare_graphs(g, h, names)
    print("metric,value,error_kind")
    for name, value, kind in report.rows():
        print(f"{name},{value!r},{kind}")
    for name, why in report.skipped.items():
        print(f"skipped {name}: {why}", file=sys.stderr)
    return EXIT_OK


def cmd_attack(args) -> int:
    if args.attack not in ATTACKS:
        raise UsageError(f"unknown attack {args.attack!r}; choose from {sorted(ATTACKS)}")
    g, h = read_graph_pair(args.original, args.private)
    cfg = ExperimentConfig(dataset={"synthetic": {}}, mechanism={"id": "edge-rr"}, trials=1,
                           base_seed=args.seed, attack_pairs=args.pairs)
    for name, value in run_attack(g, h, args.attack, cfg).items():
        print(f"{name},{value!r}")
    return EXIT_OK


def cmd_compare(args) -> int:
    table = compare_report(args.results, args.out)
    if args.out is None:
        sys.stdout.write(format_table(table))
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = _parse_spec(args.spec)
    g = synth_dataset(spec, make_rng(args.seed))
    if args.out:
        write_edge_list(g, args.out)
        print(f"n={g.n} m={g.m} -> {args.out}")
    else:
        for u, v in g.edges.tolist():
            print(u, v)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphdp", description="Private graph release benchmark.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run an experiment grid from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--epsilons", type=float, nargs="+")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--workers", type=int)
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("metrics", help="compare two edge lists")
    m.add_argument("--graph", action="append", required=True)
    m.add_argument("--metric", action="append", help="repeatable; defaults to the descriptive set")
    m.set_defaults(func=cmd_metrics)

    a = sub.add_parser("attack", help="run one attack on an (original, private) pair")
    a.add_argument("--original", required=True)
    a.add_argument("--private", required=True)
    a.add_argument("--attack", required=True, help=", ".join(sorted(ATTACKS)))
    a.add_argument("--pairs", type=int, default=1000)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_attack)

    c = sub.add_parser("compare", help="tabulate several results.csv files")
    c.add_argument("results", nargs="+")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("synth", help="write a synthetic graph as an edge list")
    s.add_argument("--spec", required=True, help="JSON object or path to one")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, MetricError, AttackError, CompareError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
