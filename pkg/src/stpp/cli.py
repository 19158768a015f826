"""Command line entry point: ``stpp {topo,run,sweep,theory}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, mixing, theory, topology


def _root(value: str):
    return value if value == "center" else int(value)


def cmd_topo(args) -> dict:
    g = topology.make_topology(args.family, args.n, args.m)
    root = topology.resolve_root(g, args.root)
    doc = topology.describe(g, root)
    if args.emit_matrices:
        out = Path(args.emit_matrices)
        out.mkdir(parents=True, exist_ok=True)
        r = mixing.build_pull_matrix(topology.extract_pull_tree(g, root))
        c = mixing.build_push_matrix(topology.extract_push_tree(g, root))
        mixing.to_matrix_market(r, out / "R.mtx")
        mixing.to_matrix_market(c, out / "C.mtx")
        doc["matrices"] = [str(out / "R.mtx"), str(out / "C.mtx")]
    return doc


def _config(args) -> harness.ExperimentConfig:
    overrides = {"algorithm": args.algo, "out": getattr(args, "out", None)}
    if args.config:
        return harness.ExperimentConfig.load(args.config, **overrides)
    return harness.ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_run(args) -> dict:
    cfg = _config(args)
    rec = harness.run_experiment(cfg)
    summary = {
        "algorithm": cfg.algorithm,
        "topology": cfg.topology,
        "n": cfg.n,
        "stepsize": rec.gamma_base,
        "final_grad_norm_sq": float(rec.mean["grad_norm_sq_root"][-1]),
        "wall_clock": rec.wall_clock,
    }
    if cfg.out:
        summary["csv"] = str(harness.emit_csv(rec, cfg.out))
    return summary


def cmd_sweep(args) -> dict:
    cfg = _config(args)
    ns = [int(v) for v in args.ns.split(",") if v]
    table = harness.sweep_n(cfg, ns, threshold=args.threshold)
    doc = {"rows": table}
    if args.out:
        doc["csv"] = str(harness.emit_sweep_csv(table, args.out))
    return doc


def cmd_theory(args) -> dict:
    rep = theory.theory_report(
        args.family, args.n, regime=args.regime, L=args.L, mu=args.mu, sigma=args.sigma,
        delta_f=args.delta_f, T=args.T, m=args.m, root=args.root,
    )
    return rep.to_dict()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stpp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("topo", help="describe a topology and its spanning trees as JSON")
    p.add_argument("--family", required=True, choices=topology.FAMILIES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="sub-ring count (multi-subring)")
    p.add_argument("--root", type=_root, default=1, help="root node id or 'center'")
    p.add_argument("--emit-matrices", default=None, metavar="DIR",
                   help="write R.mtx and C.mtx (Matrix Market) into DIR")
    p.set_defaults(func=cmd_topo)

    p = sub.add_parser("run", help="run one experiment configuration")
    p.add_argument("--config", default=None)
    p.add_argument("--algo", default=None, choices=harness.ALGORITHMS)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a configuration over several network sizes")
    p.add_argument("--config", default=None)
    p.add_argument("--algo", default=None, choices=harness.ALGORITHMS)
    p.add_argument("--ns", required=True, help="comma-separated sizes, e.g. 4,8,16")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("theory", help="stepsize and transient-iteration prediction")
    p.add_argument("--family", required=True, choices=topology.FAMILIES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--regime", choices=("nonconvex", "convex"), default="nonconvex")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--delta-f", type=float, default=1.0)
    p.add_argument("--T", type=int, default=10_000)
    p.add_argument("--root", type=_root, default=1, help="root node id or 'center'")
    p.set_defaults(func=cmd_theory)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"stpp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
