"""Edge-privacy sweep: both edge mechanisms on the same graph, then a comparison table."""

import argparse
import sys
from pathlib import Path

from graphdp.harness import ExperimentConfig, compare_report, run_experiment

HERE = Path(__file__).parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    dirs = []
    for name in ("scenario1_edge_rr.json", "scenario1_deg_lap_cl.json"):
        cfg = ExperimentConfig.from_json(HERE / "configs" / name, trials=args.trials)
        cfg.output_dir = str(Path(args.out) / Path(cfg.output_dir).name)
        res = run_experiment(cfg)
        print(f"{cfg.mechanism['id']}: {res.manifest['rows']} rows -> {res.out_dir}", file=sys.stderr)
        dirs.append(res.out_dir)
    compare_report(dirs, Path(args.out) / "scenario1-compare.csv")


if __name__ == "__main__":
    main()
