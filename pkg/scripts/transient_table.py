"""Growth orders of the STPP transient-iteration bound per topology family."""
import argparse

from stpp.theory import loglog_slope, transient_bound
from stpp.topology import central_root, extract_pull_tree, extract_push_tree, make_topology, tree_stats


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmin", type=int, default=4)
    ap.add_argument("--kmax", type=int, default=10)
    ap.add_argument("--families", default="di-ring,ring,grid,static-exp")
    args = ap.parse_args()

    ns = [2**k for k in range(args.kmin, args.kmax + 1)]
    print(f"{'family':<12}{'nonconvex':>11}{'convex':>9}   (fitted log-log slopes, n={ns[0]}..{ns[-1]})")
    for family in args.families.split(","):
        nc, cv = [], []
        for n in ns:
            g = make_topology(family, n)
            root = central_root(g)
            sr = tree_stats(extract_pull_tree(g, root))
            sc = tree_stats(extract_push_tree(g, root))
            nc.append(transient_bound(sr, sc, n, "nonconvex"))
            cv.append(transient_bound(sr, sc, n, "convex"))
        print(f"{family:<12}{loglog_slope(ns, nc):>11.2f}{loglog_slope(ns, cv):>9.2f}")


if __name__ == "__main__":
    main()
