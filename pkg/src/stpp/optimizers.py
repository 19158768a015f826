"""Synchronous-round decentralized optimizers over a stacked n x p state.

Every step has the shape ``step(state, weights, gamma, oracle) -> state`` where
``oracle(X, t)`` returns the n x p matrix of stochastic gradients drawn at
iteration t. Tracker updates are grouped as ``(W @ Y - G_old) + G_new``; with a
single agent this makes ``Y == G`` hold bit for bit, so every tracking method
collapses onto plain SGD.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .mixing import MixingMatrix
from .oracles import GradientStream, Problem

ALGORITHMS = ("stpp", "dsgd", "dsgt", "sgp", "pushdiging")

Oracle = Callable[[np.ndarray, int], np.ndarray]


class StepError(ValueError):
    pass


@dataclass(frozen=True)
class SwarmState:
    X: np.ndarray
    G: np.ndarray  # last drawn stochastic gradients
    Y: np.ndarray | None = None  # gradient trackers
    Z: np.ndarray | None = None  # push-sum numerators
    w: np.ndarray | None = None  # push-sum weights
    t: int = 0

    @property
    def n(self) -> int:
        return self.X.shape[0]


def sampling_oracle(problem: Problem, stream: GradientStream) -> Oracle:
    def oracle(X, t):
        return problem.sample_gradients(X, stream, t)

    return oracle


def init_state(algorithm: str, x0: np.ndarray, n: int, oracle: Oracle) -> SwarmState:
    """Identical rows x0 at every agent and one gradient draw at t = 0."""
    if algorithm not in ALGORITHMS:
        raise StepError(f"unknown algorithm {algorithm!r}")
    X = np.tile(np.asarray(x0, dtype=float), (n, 1))
    G = oracle(X, 0)
    state = SwarmState(X=X, G=G)
    if algorithm in ("stpp", "dsgt", "pushdiging"):
        state = replace(state, Y=G.copy())
    if algorithm in ("sgp", "pushdiging"):
        state = replace(state, Z=X.copy(), w=np.ones(n))
    return state


def stpp_init(x0: np.ndarray, n: int, oracle: Oracle) -> SwarmState:
    return init_state("stpp", x0, n, oracle)


def _check(state: SwarmState, m: MixingMatrix, gamma: float):
    if m.n != state.n:
        raise StepError(f"mixing matrix is {m.n}x{m.n} but the swarm has {state.n} agents")
    if gamma < 0:
        raise StepError(f"stepsize must be nonnegative, got {gamma}")


def tree_links(R: MixingMatrix, C: MixingMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Parent index of each row of R and child index of each column of C."""
    return np.argmax(R.weights, axis=1), np.argmax(C.weights, axis=0)


def stpp_step(state: SwarmState, R: MixingMatrix, C: MixingMatrix, gamma: float,
              oracle: Oracle) -> SwarmState:
    """One round of spanning-tree push-pull using index gathers."""
    _check(state, R, gamma)
    _check(state, C, gamma)
    if not (R.is_row_stochastic() and C.is_column_stochastic()):
        raise StepError("STPP needs a row-stochastic R and a column-stochastic C")
    parent, child = tree_links(R, C)
    X = (state.X - gamma * state.Y)[parent]
    G = oracle(X, state.t + 1)
    pushed = np.zeros_like(state.Y)
    np.add.at(pushed, child, state.Y)  # ascending sender order
    Y = (pushed - state.G) + G
    return replace(state, X=X, Y=Y, G=G, t=state.t + 1)


def stpp_step_dense(state: SwarmState, R: MixingMatrix, C: MixingMatrix, gamma: float,
                    oracle: Oracle) -> SwarmState:
    """Reference path with dense matrix products."""
    _check(state, R, gamma)
    _check(state, C, gamma)
    X = R.weights @ (state.X - gamma * state.Y)
    G = oracle(X, state.t + 1)
    Y = (C.weights @ state.Y - state.G) + G
    return replace(state, X=X, Y=Y, G=G, t=state.t + 1)


def stpp_step_agentwise(state: SwarmState, R: MixingMatrix, C: MixingMatrix, gamma: float,
                        oracle: Oracle) -> SwarmState:
    """Per-agent loop: pull from R-in-neighbors, sum pushes from C-in-neighbors."""
    _check(state, R, gamma)
    n = state.n
    rw, cw = np.asarray(R.weights), np.asarray(C.weights)
    X = np.empty_like(state.X)
    for i in range(n):
        acc = np.zeros(state.X.shape[1])
        for j in np.flatnonzero(rw[i]):
            acc = acc + (state.X[j] - gamma * state.Y[j])
        X[i] = acc
    G = oracle(X, state.t + 1)
    Y = np.empty_like(state.Y)
    for i in range(n):
        acc = np.zeros(state.Y.shape[1])
        for j in np.flatnonzero(cw[i]):
            acc = acc + state.Y[j]
        Y[i] = (acc - state.G[i]) + G[i]
    return replace(state, X=X, Y=Y, G=G, t=state.t + 1)


def dsgd_step(state: SwarmState, W: MixingMatrix, gamma: float, oracle: Oracle) -> SwarmState:
    """X' = W (X - gamma G)."""
    _check(state, W, gamma)
    if not W.is_row_stochastic():
        raise StepError(f"DSGD needs a doubly (or row) stochastic matrix, got {W.kind}")
    X = W.weights @ (state.X - gamma * state.G)
    G = oracle(X, state.t + 1)
    return replace(state, X=X, G=G, t=state.t + 1)


def dsgt_step(state: SwarmState, W: MixingMatrix, gamma: float, oracle: Oracle) -> SwarmState:
    """X' = W (X - gamma Y); Y' = W Y + G' - G."""
    _check(state, W, gamma)
    if not W.is_row_stochastic():
        raise StepError(f"DSGT needs a doubly (or row) stochastic matrix, got {W.kind}")
    X = W.weights @ (state.X - gamma * state.Y)
    G = oracle(X, state.t + 1)
    Y = (W.weights @ state.Y - state.G) + G
    return replace(state, X=X, Y=Y, G=G, t=state.t + 1)


def _push_sum_check(state: SwarmState, A: MixingMatrix):
    if not A.is_column_stochastic():
        raise StepError(f"push-sum needs a column-stochastic matrix, got {A.kind}")
    if state.w is None or np.any(state.w <= 0):
        raise StepError("push-sum weights must be strictly positive")


def sgp_step(state: SwarmState, A: MixingMatrix, gamma: float, oracle: Oracle) -> SwarmState:
    """Stochastic gradient push: gradients at de-biased points z / w."""
    _check(state, A, gamma)
    _push_sum_check(state, A)
    Z = A.weights @ (state.Z - gamma * state.G)
    w = A.weights @ state.w
    X = Z / w[:, None]
    G = oracle(X, state.t + 1)
    return replace(state, X=X, Z=Z, w=w, G=G, t=state.t + 1)


def pushdiging_step(state: SwarmState, A: MixingMatrix, gamma: float,
                    oracle: Oracle) -> SwarmState:
    """Push-sum with gradient tracking over a column-stochastic A."""
    _check(state, A, gamma)
    _push_sum_check(state, A)
    Z = A.weights @ (state.Z - gamma * state.Y)
    w = A.weights @ state.w
    X = Z / w[:, None]
    G = oracle(X, state.t + 1)
    Y = (A.weights @ state.Y - state.G) + G
    return replace(state, X=X, Z=Z, w=w, Y=Y, G=G, t=state.t + 1)


def make_stepper(algorithm: str, matrices: dict) -> Callable[[SwarmState, float, Oracle], SwarmState]:
    """Bind an algorithm tag to its mixing matrices: matrices needs R and C for
    STPP, W for DSGD/DSGT, A for SGP/Push-DIGing."""
    if algorithm == "stpp":
        R, C = matrices["R"], matrices["C"]
        return lambda s, g, o: stpp_step(s, R, C, g, o)
    if algorithm in ("dsgd", "dsgt"):
        W = matrices["W"]
        f = dsgd_step if algorithm == "dsgd" else dsgt_step
        return lambda s, g, o: f(s, W, g, o)
    if algorithm in ("sgp", "pushdiging"):
        A = matrices["A"]
        f = sgp_step if algorithm == "sgp" else pushdiging_step
        return lambda s, g, o: f(s, A, g, o)
    raise StepError(f"unknown algorithm {algorithm!r}")


@dataclass(frozen=True)
class MetricRow:
    grad_norm_sq_root: float
    opt_gap: float | None
    consensus_err: float
    fval_gap: float | None


def metrics(state: SwarmState, problem: Problem, agent: int = 0) -> MetricRow:
    """Quality of one agent's iterate (the root for STPP) measured with true gradients."""
    x = state.X[agent]
    grad = problem.gradient(x)
    x_star = problem.x_star
    opt_gap = None if x_star is None else float(np.sum((x - x_star) ** 2))
    f_star = problem.f_star
    fval_gap = None if f_star is None else problem.value(x) - f_star
    return MetricRow(
        grad_norm_sq_root=float(grad @ grad),
        opt_gap=opt_gap,
        consensus_err=float(np.sum((state.X - x) ** 2)),
        fval_gap=fval_gap,
    )
