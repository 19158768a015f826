"""Stepsize rules and transient-iteration predictions from tree statistics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .topology import TreeStats, extract_pull_tree, extract_push_tree, make_topology, resolve_root, tree_stats


def _positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")


def nonconvex_branches(n, d_R, d_C, r_avg, c_avg, L, sigma, delta_f, T) -> tuple[float, float, float]:
    """The three candidates whose minimum is the nonconvex stepsize."""
    _positive(n=n, d_R=d_R, d_C=d_C, r_avg=r_avg, c_avg=c_avg, L=L, delta_f=delta_f)
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    cap = 1.0 / (100 * n * math.sqrt(d_R * d_C * r_avg * c_avg) * L)
    if sigma == 0:
        return cap, math.inf, math.inf
    s2 = sigma**2
    noise = (delta_f / (5 * n * L * s2 * (T + 1))) ** 0.5
    network = (delta_f / (300 * n**2 * d_C * r_avg * c_avg * L * s2 * (T + 1))) ** (1 / 3)
    return cap, noise, network


def theoretical_stepsize_nonconvex(n, d_R, d_C, r_avg, c_avg, L, sigma, delta_f, T) -> float:
    return min(nonconvex_branches(n, d_R, d_C, r_avg, c_avg, L, sigma, delta_f, T))


def convex_branches(n, d_R, d_C, r_avg, c_avg, kappa, L, mu, T) -> tuple[float, float]:
    _positive(n=n, d_R=d_R, d_C=d_C, r_avg=r_avg, c_avg=c_avg, kappa=kappa, L=L, mu=mu)
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    decay = 16 * math.log(n * (T + 1)) / (n * mu * (T + 1))
    cap = 1.0 / (1000 * n * max(d_R, d_C) * r_avg * c_avg * kappa * L)
    return decay, cap


def theoretical_stepsize_convex(n, d_R, d_C, r_avg, c_avg, kappa, L, mu, T) -> float:
    return min(convex_branches(n, d_R, d_C, r_avg, c_avg, kappa, L, mu, T))


def transient_bound(stats_R: TreeStats, stats_C: TreeStats, n: int, regime: str) -> float:
    """Transient iterations before the centralized rate dominates (polylogs dropped)."""
    core = max(stats_R.d, stats_C.d) * stats_R.avg * stats_C.avg
    if regime == "nonconvex":
        return max(n * core**2, 1.0)
    if regime == "convex":
        return max(core, 1.0)
    raise ValueError(f"regime must be 'nonconvex' or 'convex', got {regime!r}")


@dataclass
class TheoryReport:
    regime: str
    n: int
    d_R: int
    d_C: int
    r_avg: float
    c_avg: float
    L: float
    T: int
    stepsize: float
    branches: dict
    transient: float
    mu: float | None = None
    sigma: float | None = None
    delta_f: float | None = None
    family: str | None = field(default=None)
    root: int = 1

    def to_dict(self) -> dict:
        """JSON-safe: infinite branches become None."""
        def clean(v):
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            return None if isinstance(v, float) and math.isinf(v) else v
        return clean(asdict(self))


def theory_report(family: str, n: int, regime: str = "nonconvex", L: float = 1.0,
                  mu: float | None = None, sigma: float = 1.0, delta_f: float = 1.0,
                  T: int = 10_000, m: int | None = None, root: int | str = 1) -> TheoryReport:
    g = make_topology(family, n, m)
    root = resolve_root(g, root)
    sr = tree_stats(extract_pull_tree(g, root))
    sc = tree_stats(extract_push_tree(g, root))
    # a single-node tree has zero diameter; the rules need positive inputs
    d_R, d_C = max(sr.d, 1), max(sc.d, 1)
    r_avg, c_avg = max(sr.avg, 1.0 / n), max(sc.avg, 1.0 / n)
    if regime == "nonconvex":
        b = nonconvex_branches(n, d_R, d_C, r_avg, c_avg, L, sigma, delta_f, T)
        branches = {"cap": b[0], "noise": b[1], "network": b[2]}
    elif regime == "convex":
        if mu is None:
            raise ValueError("convex regime needs mu")
        b = convex_branches(n, d_R, d_C, r_avg, c_avg, L / mu, L, mu, T)
        branches = {"decay": b[0], "cap": b[1]}
    else:
        raise ValueError(f"regime must be 'nonconvex' or 'convex', got {regime!r}")
    return TheoryReport(
        regime=regime, n=n, d_R=sr.d, d_C=sc.d, r_avg=sr.avg, c_avg=sc.avg, L=L, T=T,
        stepsize=min(b), branches=branches, transient=transient_bound(sr, sc, n, regime),
        mu=mu, sigma=sigma, delta_f=delta_f if regime == "nonconvex" else None, family=family,
        root=root,
    )


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])
