"""Experiment runner: topology -> trees -> matrices -> problem -> repeated runs."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import mixing, optimizers, theory, topology
from .oracles import GradientStream, Problem, make_problem
from .optimizers import ALGORITHMS, MetricRow

METRICS = ("grad_norm_sq_root", "opt_gap", "consensus_err", "fval_gap")
CSV_HEADER = ("iter", *METRICS, "stepsize", "rep")
STEPSIZE_RULES = ("fixed", "nonconvex", "nonconvex-noise", "convex", "convex-cap")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    topology: str = "di-ring"
    n: int = 20
    m: int | None = None  # sub-ring count for multi-subring
    root: int | str = 1
    problem: str = "logistic"
    problem_params: dict = field(default_factory=lambda: dict(p=50, J=100, reg=0.01, sigma_h=0.2))
    algorithm: str = "stpp"
    gamma: float = 0.4
    stpp_divide_by_n: bool = True
    stepsize_rule: str = "fixed"
    schedule: str = "decay"  # constant | decay
    decay_factor: float = 0.8
    decay_period: int = 300
    iterations: int = 1500
    repetitions: int = 3
    seed: int = 0
    problem_seed: int | None = None
    x0: float | list = 0.0
    sigma: float | None = None  # noise level for the theory rules; defaults to the problem's
    record_every: int | None = None
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.iterations < 0:
            raise ConfigError(f"iterations must be >= 0, got {self.iterations}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if not 0 < self.decay_factor <= 1:
            raise ConfigError(f"decay factor must lie in (0, 1], got {self.decay_factor}")
        if self.decay_period < 1:
            raise ConfigError(f"decay period must be >= 1, got {self.decay_period}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.topology not in topology.FAMILIES:
            raise ConfigError(f"unknown topology {self.topology!r}; expected one of {topology.FAMILIES}")
        if self.problem not in ("logistic", "quadratic"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.schedule not in ("constant", "decay"):
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if self.stepsize_rule not in STEPSIZE_RULES:
            raise ConfigError(f"unknown stepsize rule {self.stepsize_rule!r}")
        if self.stepsize_rule == "fixed" and not self.gamma > 0:
            raise ConfigError(f"stepsize must be positive, got {self.gamma}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path, **overrides) -> "ExperimentConfig":
        with open(path) as fh:
            d = json.load(fh)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    config: dict
    iterations: np.ndarray
    stepsizes: np.ndarray
    series: list  # one {metric: array or None} per repetition
    wall_clock: float
    gamma_base: float

    @property
    def mean(self) -> dict:
        out = {}
        for m in METRICS:
            if self.series[0][m] is None:
                out[m] = None
            else:
                out[m] = np.mean([s[m] for s in self.series], axis=0)
        return out

    def final_window_mean(self, metric: str = "grad_norm_sq_root", frac: float = 0.1) -> float:
        """Average over the last ``frac`` of recorded iterations of the rep-averaged series."""
        values = self.mean[metric]
        k = max(1, int(math.ceil(frac * len(values))))
        return float(np.mean(values[-k:]))


def stepsize_at(cfg: ExperimentConfig, gamma: float, t: int) -> float:
    if cfg.schedule == "constant":
        return gamma
    return gamma * cfg.decay_factor ** (t // cfg.decay_period)


def default_stride(T: int) -> int:
    return 1 if T <= 10_000 else math.ceil(T / 10_000)


def build_matrices(g: topology.DirectedGraph, algorithm: str, root: int = 1) -> dict:
    if algorithm == "stpp":
        pull = topology.extract_pull_tree(g, root)
        push = topology.extract_push_tree(g, root)
        return {"R": mixing.build_pull_matrix(pull), "C": mixing.build_push_matrix(push)}
    if algorithm in ("dsgd", "dsgt"):
        return {"W": mixing.gossip_weights(g)}
    return {"A": mixing.uniform_column_weights(g)}


def initial_point(cfg: ExperimentConfig, p: int) -> np.ndarray:
    if isinstance(cfg.x0, (int, float)):
        return np.full(p, float(cfg.x0))
    x0 = np.asarray(cfg.x0, dtype=float)
    if x0.shape != (p,):
        raise ConfigError(f"x0 has shape {x0.shape}, expected ({p},)")
    return x0


def base_stepsize(cfg: ExperimentConfig, g: topology.DirectedGraph, problem: Problem,
                  x0: np.ndarray, root: int) -> float:
    """Stepsize before scheduling. Theory rules use the trees' statistics."""
    n = g.n
    if cfg.stepsize_rule == "fixed":
        if cfg.algorithm == "stpp" and cfg.stpp_divide_by_n:
            return cfg.gamma / n
        return cfg.gamma
    sr = topology.tree_stats(topology.extract_pull_tree(g, root))
    sc = topology.tree_stats(topology.extract_push_tree(g, root))
    args = (n, max(sr.d, 1), max(sc.d, 1), max(sr.avg, 1 / n), max(sc.avg, 1 / n))
    T = cfg.iterations
    if cfg.stepsize_rule.startswith("nonconvex"):
        sigma = cfg.sigma if cfg.sigma is not None else getattr(problem, "sigma", None)
        if sigma is None:
            raise ConfigError("nonconvex stepsize rule needs a noise level; set 'sigma'")
        f_star = problem.f_star
        # objectives here are nonnegative, so f(x0) bounds the gap when f* is unknown
        delta_f = problem.value(x0) - (f_star if f_star is not None else 0.0)
        branches = theory.nonconvex_branches(*args, problem.L, sigma, delta_f, T)
        return branches[1] if cfg.stepsize_rule == "nonconvex-noise" else min(branches)
    if problem.mu is None:
        raise ConfigError("convex stepsize rules need a strongly convex problem")
    branches = theory.convex_branches(*args, problem.L / problem.mu, problem.L, problem.mu, T)
    return branches[1] if cfg.stepsize_rule == "convex-cap" else min(branches)


def _row_values(row: MetricRow):
    return [getattr(row, m) for m in METRICS]


def run_experiment(cfg: ExperimentConfig, problem: Problem | None = None) -> RunRecord:
    """Run every repetition of one configuration. Deterministic in cfg.seed."""
    start = time.perf_counter()
    g = topology.make_topology(cfg.topology, cfg.n, cfg.m)
    root = topology.resolve_root(g, cfg.root)
    if problem is None:
        pseed = cfg.seed if cfg.problem_seed is None else cfg.problem_seed
        problem = make_problem(cfg.problem, cfg.n, seed=pseed, **cfg.problem_params)
    if problem.n != g.n:
        raise ConfigError(f"problem has {problem.n} agents but the graph has {g.n} nodes")
    x0 = initial_point(cfg, problem.p)
    matrices = build_matrices(g, cfg.algorithm, root)
    step = optimizers.make_stepper(cfg.algorithm, matrices)
    gamma = base_stepsize(cfg, g, problem, x0, root)
    metric_agent = root - 1 if cfg.algorithm == "stpp" else 0

    T = cfg.iterations
    stride = cfg.record_every or default_stride(T)
    recorded = [t for t in range(T + 1) if t % stride == 0 or t == T]
    stepsizes = np.array([stepsize_at(cfg, gamma, t) for t in recorded])

    series = []
    for rep in range(cfg.repetitions):
        oracle = optimizers.sampling_oracle(problem, GradientStream(cfg.seed, rep))
        state = optimizers.init_state(cfg.algorithm, x0, problem.n, oracle)
        rows = [_row_values(optimizers.metrics(state, problem, metric_agent))]
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(T):
                state = step(state, stepsize_at(cfg, gamma, t), oracle)
                if state.t % stride == 0 or state.t == T:
                    rows.append(_row_values(optimizers.metrics(state, problem, metric_agent)))
        cols = list(zip(*rows))
        series.append({
            m: (None if any(v is None for v in col) else np.array(col, dtype=float))
            for m, col in zip(METRICS, cols)
        })
    return RunRecord(
        config=cfg.to_dict(),
        iterations=np.array(recorded),
        stepsizes=stepsizes,
        series=series,
        wall_clock=time.perf_counter() - start,
        gamma_base=gamma,
    )


def _fmt(v) -> str:
    if v is None:
        return ""
    return "%.17g" % v


def emit_csv(rec: RunRecord, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for rep, s in enumerate(rec.series):
            for k, t in enumerate(rec.iterations):
                vals = [None if s[m] is None else s[m][k] for m in METRICS]
                w.writerow([int(t), *map(_fmt, vals), _fmt(rec.stepsizes[k]), rep])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append({
            k: (int(v) if k in ("iter", "rep") else (None if v == "" else float(v)))
            for k, v in r.items()
        })
    return out


def iterations_to_threshold(rec: RunRecord, threshold: float,
                            metric: str = "grad_norm_sq_root") -> int | None:
    values = rec.mean[metric]
    hits = np.flatnonzero(values <= threshold)
    return None if hits.size == 0 else int(rec.iterations[hits[0]])


def sweep_n(base: ExperimentConfig, ns, threshold: float | None = None,
            window: float = 0.1) -> list[dict]:
    """Run the base config at each network size; one summary row per n."""
    table = []
    for n in ns:
        rec = run_experiment(replace(base, n=int(n)))
        table.append({
            "n": int(n),
            "stepsize": rec.gamma_base,
            "iters_to_threshold": None if threshold is None else iterations_to_threshold(rec, threshold),
            "final_grad_norm_sq": rec.final_window_mean("grad_norm_sq_root", window),
            "wall_clock": rec.wall_clock,
        })
    return table


def emit_sweep_csv(table: list[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ("n", "stepsize", "iters_to_threshold", "final_grad_norm_sq")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in table:
            w.writerow([
                row["n"], _fmt(row["stepsize"]),
                "" if row["iters_to_threshold"] is None else row["iters_to_threshold"],
                _fmt(row["final_grad_norm_sq"]),
            ])
    return path
