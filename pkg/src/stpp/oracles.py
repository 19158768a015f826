"""Stochastic first-order oracles.

Two problem families: heterogeneous logistic regression with a nonconvex
regularizer, and diagonal quadratics with a closed-form minimizer. Every
random draw made while optimizing is keyed by (seed, agent, iteration) so
results do not depend on evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import expit

SNAPSHOT_VERSION = 1


class GradientStream:
    """Counter-based RNG: one independent Philox stream per (agent, iteration)."""

    def __init__(self, seed: int, rep: int = 0):
        self.seed = int(seed)
        self.rep = int(rep)
        words = np.random.SeedSequence([self.seed, self.rep]).generate_state(2, np.uint64)
        self._key = int(words[0]) | (int(words[1]) << 64)

    def rng(self, agent: int, iteration: int) -> np.random.Generator:
        # low counter words stay free for the stream's own increments
        bits = np.random.Philox(key=self._key, counter=[0, 0, int(agent), int(iteration)])
        return np.random.Generator(bits)


@dataclass(frozen=True)
class GradientSample:
    agent: int
    iteration: int
    value: np.ndarray


class Problem:
    """Shared oracle surface. Agents are 0-based here (row index of X)."""

    n: int
    p: int
    L: float
    mu: float | None = None
    x_star: np.ndarray | None = None

    def local_value(self, i: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def local_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def full_gradient(self, X: np.ndarray) -> np.ndarray:
        return np.stack([self.local_gradient(i, X[i]) for i in range(self.n)])

    def value(self, x: np.ndarray) -> float:
        return float(np.mean([self.local_value(i, x) for i in range(self.n)]))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient of the average objective at a single point."""
        return self.full_gradient(np.broadcast_to(x, (self.n, self.p))).mean(axis=0)

    @property
    def f_star(self) -> float | None:
        return None if self.x_star is None else self.value(self.x_star)

    def stochastic_gradient(self, i: int, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def draw(self, i: int, x: np.ndarray, stream: GradientStream, iteration: int) -> GradientSample:
        g = self.stochastic_gradient(i, x, stream.rng(i, iteration))
        return GradientSample(agent=i, iteration=iteration, value=g)

    def sample_gradients(self, X: np.ndarray, stream: GradientStream, iteration: int) -> np.ndarray:
        return np.stack(
            [self.stochastic_gradient(i, X[i], stream.rng(i, iteration)) for i in range(self.n)]
        )


@dataclass(frozen=True, eq=False)
class QuadraticProblem(Problem):
    """f_i(x) = 1/2 (x - b_i)^T diag(a_i) (x - b_i); gradient noise N(0, sigma^2/p I)."""

    a: np.ndarray
    b: np.ndarray
    sigma: float = 0.0
    L: float = field(default=0.0)
    mu: float | None = field(default=None)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape:
            raise ValueError(f"curvature {a.shape} and centers {b.shape} disagree")
        if np.any(a <= 0):
            raise ValueError("diagonal curvatures must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not self.L:
            object.__setattr__(self, "L", float(a.max()))
        if self.mu is None:
            object.__setattr__(self, "mu", float(a.mean(axis=0).min()))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def p(self) -> int:
        return self.a.shape[1]

    @property
    def x_star(self) -> np.ndarray:
        return (self.a * self.b).sum(axis=0) / self.a.sum(axis=0)

    def local_value(self, i, x):
        d = x - self.b[i]
        return 0.5 * float(d @ (self.a[i] * d))

    def value(self, x):
        d = x - self.b
        return 0.5 * float(np.sum(self.a * d * d)) / self.n

    def local_gradient(self, i, x):
        return self.a[i] * (x - self.b[i])

    def full_gradient(self, X):
        return self.a * (X - self.b)

    def stochastic_gradient(self, i, x, rng):
        g = self.local_gradient(i, x)
        if self.sigma > 0:
            g = g + rng.normal(0.0, self.sigma / np.sqrt(self.p), self.p)
        return g


def gen_quadratic(n: int, p: int, mu: float, L: float, heterogeneity: float = 1.0,
                  sigma: float = 0.0, seed: int = 0) -> QuadraticProblem:
    """Random diagonal quadratics whose average is mu-strongly convex and L-smooth.

    Coordinate 0 has curvature mu and the last coordinate curvature L at every
    agent, so both constants are attained by the average.
    """
    if not 0 < mu <= L:
        raise ValueError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    rng = np.random.default_rng(seed)
    a = rng.uniform(mu, L, size=(n, p))
    a[:, 0] = mu
    if p >= 2:
        a[:, -1] = L
    center = rng.standard_normal(p)
    b = center + heterogeneity * rng.standard_normal((n, p))
    return QuadraticProblem(a=a, b=b, sigma=sigma, L=L, mu=mu)


@dataclass(frozen=True, eq=False)
class LogisticProblem(Problem):
    """Per-agent logistic loss plus R * sum_k x_k^2 / (1 + x_k^2)."""

    features: np.ndarray  # (n, J, p)
    labels: np.ndarray  # (n, J) in {-1, +1}
    reg: float
    batch: int = 1
    sigma_h: float = 0.0
    models: np.ndarray | None = None  # per-agent generating parameters

    def __post_init__(self):
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if not 1 <= self.batch <= self.J:
            raise ValueError(f"batch must lie in 1..{self.J}, got {self.batch}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def J(self) -> int:
        return self.features.shape[1]

    @property
    def p(self) -> int:
        return self.features.shape[2]

    @cached_property
    def L(self) -> float:
        # data Gram bound plus the regularizer's curvature bound
        gram = max(np.linalg.norm(self.features[i], 2) ** 2 for i in range(self.n))
        return gram / (4 * self.J) + 2 * self.reg

    def _reg_value(self, x):
        x2 = x * x
        return self.reg * float(np.sum(x2 / (1 + x2)))

    def _reg_grad(self, x):
        return 2 * self.reg * x / (1 + x * x) ** 2

    def local_value(self, i, x):
        margins = self.labels[i] * (self.features[i] @ x)
        return float(np.mean(np.logaddexp(0.0, -margins))) + self._reg_value(x)

    def value(self, x):
        margins = self.labels * (self.features @ x)
        return float(np.mean(np.logaddexp(0.0, -margins))) + self._reg_value(x)

    def _data_grad(self, h, y, x):
        coef = -y * expit(-y * (h @ x))
        return coef @ h / len(y)

    def local_gradient(self, i, x):
        return self._data_grad(self.features[i], self.labels[i], x) + self._reg_grad(x)

    def full_gradient(self, X):
        margins = self.labels * np.einsum("njp,np->nj", self.features, X)
        coef = -self.labels * expit(-margins) / self.J
        return np.einsum("nj,njp->np", coef, self.features) + self._reg_grad(X)

    def gradient(self, x):
        return self._data_grad(
            self.features.reshape(-1, self.p), self.labels.reshape(-1), x
        ) + self._reg_grad(x)

    def stochastic_gradient(self, i, x, rng):
        if self.batch == self.J:
            return self.local_gradient(i, x)
        idx = rng.integers(0, self.J, size=self.batch)
        return self._data_grad(self.features[i, idx], self.labels[i, idx], x) + self._reg_grad(x)


def gen_logistic(n: int, p: int, J: int, reg: float = 0.01, sigma_h: float = 0.2,
                 seed: int = 0, batch: int = 1) -> LogisticProblem:
    """Heterogeneous synthetic data: agent i labels with model x_common + v_i."""
    rng = np.random.default_rng(seed)
    common = rng.standard_normal(p)
    models = common + sigma_h * rng.standard_normal((n, p))
    features = rng.standard_normal((n, J, p))
    z = rng.uniform(0.0, 1.0, size=(n, J))
    prob = expit(np.einsum("njp,np->nj", features, models))
    labels = np.where(z <= prob, 1, -1).astype(np.int8)
    return LogisticProblem(features=features, labels=labels, reg=reg, batch=batch,
                           sigma_h=sigma_h, models=models)


def make_problem(family: str, n: int, seed: int = 0, **params) -> Problem:
    if family == "logistic":
        return gen_logistic(n=n, seed=seed, **params)
    if family == "quadratic":
        return gen_quadratic(n=n, seed=seed, **params)
    raise ValueError(f"unknown problem family {family!r}")


def save_snapshot(problem: Problem, path) -> Path:
    """Binary dump for exact replay, tagged with a format version."""
    path = Path(path)
    header = dict(format="stpp-problem", version=SNAPSHOT_VERSION)
    if isinstance(problem, LogisticProblem):
        np.savez(path, **header, family="logistic", features=problem.features,
                 labels=problem.labels, reg=problem.reg, batch=problem.batch,
                 sigma_h=problem.sigma_h,
                 models=problem.models if problem.models is not None else np.empty(0))
    elif isinstance(problem, QuadraticProblem):
        np.savez(path, **header, family="quadratic", a=problem.a, b=problem.b,
                 sigma=problem.sigma, L=problem.L, mu=problem.mu)
    else:
        raise TypeError(f"cannot snapshot {type(problem).__name__}")
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def load_snapshot(path) -> Problem:
    with np.load(path) as z:
        if str(z["format"]) != "stpp-problem":
            raise ValueError(f"{path} is not a problem snapshot")
        version = int(z["version"])
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"snapshot version {version} unsupported (expected {SNAPSHOT_VERSION})")
        family = str(z["family"])
        if family == "logistic":
            models = z["models"]
            return LogisticProblem(features=z["features"], labels=z["labels"],
                                   reg=float(z["reg"]), batch=int(z["batch"]),
                                   sigma_h=float(z["sigma_h"]),
                                   models=models if models.size else None)
        return QuadraticProblem(a=z["a"], b=z["b"], sigma=float(z["sigma"]),
                                L=float(z["L"]), mu=float(z["mu"]))
