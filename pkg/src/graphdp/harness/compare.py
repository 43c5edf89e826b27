"""Side-by-side comparison of result files from several mechanisms."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .runner import RAW_DIRECTION, aggregate, atomic_write, read_results_csv

TABLE_HEADER = ("dataset", "metric", "error_kind", "epsilon", "mechanism", "mean", "std", "best")


class CompareError(ValueError):
    pass


def _direction(metric: str, kind: str) -> int:
    if kind != "raw":
        return -1
    return RAW_DIRECTION.get(metric, 1)


def compare_rows(results: list[list[dict]]) -> list[dict]:
    """Merge raw result rows of several runs into one long-format table.

    Only epsilons present in every input are kept. ``best`` marks the
    mechanism with the best mean in each (dataset, metric, epsilon) cell;
    ties go to the lexicographically smallest mechanism id.
    """
    if not results:
        raise CompareError("nothing to compare")
    grids = [{r["epsilon"] for r in rows} for rows in results]
    common = set.intersection(*grids)
    if not common:
        raise CompareError("epsilon grids of the inputs do not overlap")

    cells: dict[tuple, list[dict]] = {}
    for rows in results:
        by_mech: dict[tuple, list] = {}
        for r in rows:
            if r["epsilon"] in common:
                by_mech.setdefault((r["dataset"], r["mechanism"]), []).append(r)
        for (dataset, mech), part in by_mech.items():
            for a in aggregate(part):
                key = (dataset, a["metric"], a["error_kind"], a["epsilon"])
                entry = {"mechanism": mech, "mean": a["mean"], "std": a["std"]}
                cells.setdefault(key, []).append(entry)

    table = []
    for key in sorted(cells):
        dataset, metric, kind, eps = key
        entries = sorted(cells[key], key=lambda e: e["mechanism"])
        ids = [e["mechanism"] for e in entries]
        if len(set(ids)) != len(ids):
            raise CompareError(f"mechanism listed twice for {dataset}/{metric} at epsilon={eps}")
        sign = _direction(metric, kind)
        finite = [e for e in entries if math.isfinite(e["mean"])]
        best = min(finite, key=lambda e: (-sign * e["mean"], e["mechanism"]))["mechanism"] if finite else None
        for e in entries:
            table.append(
                {"dataset": dataset, "metric": metric, "error_kind": kind, "epsilon": eps,
                 "mechanism": e["mechanism"], "mean": e["mean"], "std": e["std"],
                 "best": e["mechanism"] == best}
            )
    return table


def compare_report(paths, out=None) -> list[dict]:
    """Read ``results.csv`` files (or run directories) and optionally write the table as CSV."""
    results = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            p = p / "results.csv"
        results.append(read_results_csv(p))
    table = compare_rows(results)
    if out is not None:
        atomic_write(Path(out), format_table(table))
    return table


def format_table(table: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for r in table:
        std = "" if r["std"] is None else repr(float(r["std"]))
        w.writerow([r["dataset"], r["metric"], r["error_kind"], repr(float(r["epsilon"])), r["mechanism"],
                    repr(float(r["mean"])), std, int(r["best"])])
    return buf.getvalue()
