"""Run every algorithm on one configuration and write a CSV per algorithm.

    python scripts/compare_algorithms.py configs/logistic_reduced.json --out results/
"""
import argparse
from dataclasses import replace
from pathlib import Path

from stpp.harness import ALGORITHMS, ExperimentConfig, emit_csv, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default="results")
    ap.add_argument("--algos", default=",".join(ALGORITHMS))
    ap.add_argument("--topology", default=None, help="override the config's topology family")
    args = ap.parse_args()

    base = ExperimentConfig.load(args.config)
    if args.topology:
        base = replace(base, topology=args.topology)
    out = Path(args.out)
    print(f"{'algorithm':<12}{'stepsize':>12}{'final |grad|^2':>18}{'last 10% mean':>16}{'secs':>8}")
    for algo in args.algos.split(","):
        rec = run_experiment(replace(base, algorithm=algo))
        emit_csv(rec, out / f"{base.topology}_{algo}.csv")
        final = rec.mean["grad_norm_sq_root"][-1]
        print(f"{algo:<12}{rec.gamma_base:>12.4g}{final:>18.4e}"
              f"{rec.final_window_mean():>16.4e}{rec.wall_clock:>8.1f}")


if __name__ == "__main__":
    main()
