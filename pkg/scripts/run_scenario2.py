"""Node-privacy sweep with the de-anonymisation attack."""

import argparse
from pathlib import Path

from graphdp.harness import ExperimentConfig, run_experiment

HERE = Path(__file__).parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    cfg = ExperimentConfig.from_json(HERE / "configs" / "scenario2_pi_v.json", trials=args.trials)
    cfg.output_dir = str(Path(args.out) / Path(cfg.output_dir).name)
    res = run_experiment(cfg)
    for row in res.aggregate:
        if row["metric"] in ("edge_correctness", "s3", "num_nodes"):
            print(f"{row['metric']:>18} eps={row['epsilon']:<5} mean={row['mean']:.4f}")


if __name__ == "__main__":
    main()
