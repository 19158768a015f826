"""Mixing matrices: the 0/1 pull/push matrices and baseline weights.

All matrices act on the left of an n x p stacked state, so entry (i, j) is the
weight node i gives to what it receives from node j.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import DirectedGraph, SpanningTree, TopologyError

KINDS = ("row", "column", "doubly")
SUM_TOL = 1e-12


class MixingError(ValueError):
    pass


def classify(weights: np.ndarray, tol: float = SUM_TOL) -> str | None:
    """Stochasticity of a nonnegative square matrix, or None."""
    rows = np.all(np.abs(weights.sum(axis=1) - 1) <= tol)
    cols = np.all(np.abs(weights.sum(axis=0) - 1) <= tol)
    if rows and cols:
        return "doubly"
    if rows:
        return "row"
    if cols:
        return "column"
    return None


@dataclass(frozen=True)
class MixingMatrix:
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        w = np.array(self.weights)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise MixingError(f"mixing matrix must be square, got shape {w.shape}")
        if np.any(w < 0):
            raise MixingError("mixing matrix has negative entries")
        if self.kind not in KINDS:
            raise MixingError(f"unknown kind {self.kind!r}")
        actual = classify(w)
        ok = actual == self.kind or (actual == "doubly" and self.kind in ("row", "column"))
        if not ok:
            raise MixingError(f"matrix tagged {self.kind}-stochastic but sums say {actual}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def is_row_stochastic(self) -> bool:
        return self.kind in ("row", "doubly")

    def is_column_stochastic(self) -> bool:
        return self.kind in ("column", "doubly")

    def __matmul__(self, other):
        return self.weights @ other


def _tree_matrix(t: SpanningTree) -> np.ndarray:
    """M[i, link(i)] = 1 plus the root self-loop, as an int64 0/1 matrix."""
    m = np.zeros((t.n, t.n), dtype=np.int64)
    m[np.arange(t.n), t.toward_root()] = 1
    return m


def build_pull_matrix(t: SpanningTree) -> MixingMatrix:
    if t.orientation != "pull":
        raise MixingError("build_pull_matrix needs a pull tree")
    # row i holds a single 1 at its parent (root points to itself)
    return MixingMatrix(_tree_matrix(t), "row")


def build_push_matrix(t: SpanningTree) -> MixingMatrix:
    if t.orientation != "push":
        raise MixingError("build_push_matrix needs a push tree")
    # column j holds a single 1 at its child (root points to itself)
    return MixingMatrix(_tree_matrix(t).T.copy(), "column")


def indicator_columns(t: SpanningTree, k: int) -> np.ndarray:
    """Z_k from tree distances alone.

    Column ``root`` flags every node within depth k; column j != root flags the
    nodes exactly k levels below j. Treats ``link`` as the parent pointer.
    """
    if k < 1:
        raise MixingError(f"power k must be >= 1, got {k}")
    depth = np.asarray(t.depth)
    parent = t.toward_root()
    z = np.zeros((t.n, t.n), dtype=np.int64)
    for i in range(t.n):
        if depth[i] <= k:
            z[i, t.root - 1] = 1
            continue
        j = i
        for _ in range(k):
            j = parent[j]
        assert depth[i] - depth[j] == k
        z[i, j] = 1
    return z


def indicator_power(t: SpanningTree, k: int) -> np.ndarray:
    """Closed-form k-th power of the tree's own mixing matrix.

    Pull tree: R^k = Z_k. Push tree: C^k = Z_k^T with the child pointers
    playing the parent role.
    """
    z = indicator_columns(t, k)
    return z if t.orientation == "pull" else z.T.copy()


def stationary_vectors(r: MixingMatrix, c: MixingMatrix, tol: float = 0.0):
    """Left fixed point of R and right fixed point of C (both e_root)."""
    rw, cw = np.asarray(r.weights), np.asarray(c.weights)
    n = rw.shape[0]
    # root row of R / root column of C is the self-loop
    roots_r = [i for i in range(n) if rw[i, i] == 1]
    roots_c = [i for i in range(n) if cw[i, i] == 1]
    if len(roots_r) != 1 or roots_r != roots_c:
        raise MixingError("R and C do not share a single root")
    pi = np.zeros(n)
    pi[roots_r[0]] = 1.0
    if np.max(np.abs(pi @ rw - pi)) > tol or np.max(np.abs(cw @ pi - pi)) > tol:
        raise MixingError("fixed-point check failed; R/C construction is inconsistent")
    return pi, pi.copy()


def _power_iteration_norm(d: np.ndarray, tol: float = 1e-14, max_iter: int = 20000) -> float:
    """Largest singular value of d via power iteration on d^T d."""
    gram = d.T @ d
    if not np.any(gram):
        return 0.0
    v = np.ones(gram.shape[0]) + np.linspace(0.0, 0.5, gram.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ gram @ v)
        if abs(new - lam) <= tol * max(new, 1.0):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def spectral_norm_defect(t: SpanningTree, k: int) -> float:
    """||M^k - limit||_2 where the limit is 1 e_root^T (pull) or e_root 1^T (push)."""
    if k < 0:
        raise MixingError(f"power k must be >= 0, got {k}")
    m = build_pull_matrix(t) if t.orientation == "pull" else build_push_matrix(t)
    mk = np.linalg.matrix_power(np.asarray(m.weights), k)
    limit = np.zeros((t.n, t.n), dtype=np.int64)
    if t.orientation == "pull":
        limit[:, t.root - 1] = 1
    else:
        limit[t.root - 1, :] = 1
    return _power_iteration_norm((mk - limit).astype(float))


def metropolis_weights(g: DirectedGraph) -> MixingMatrix:
    if not g.is_symmetric():
        raise MixingError("Metropolis weights need a bidirected graph")
    deg = np.zeros(g.n + 1, dtype=np.int64)
    for j, _ in g.edges:
        deg[j] += 1
    w = np.zeros((g.n, g.n))
    for j, i in g.edges:
        w[i - 1, j - 1] = 1.0 / (1 + max(deg[i], deg[j]))
    w[np.diag_indices(g.n)] = 1.0 - w.sum(axis=1)
    return MixingMatrix(w, "doubly")


def uniform_column_weights(g: DirectedGraph) -> MixingMatrix:
    """Each node splits its mass evenly over itself and its out-neighbors."""
    w = np.eye(g.n)
    adj = g.adjacency_lists()
    for j in range(1, g.n + 1):
        share = 1.0 / (len(adj[j]) + 1)
        w[j - 1, j - 1] = share
        for i in adj[j]:
            w[i - 1, j - 1] = share
    return MixingMatrix(w, classify(w) or "column")


def uniform_row_weights(g: DirectedGraph) -> MixingMatrix:
    """Each node averages itself and its in-neighbors evenly."""
    w = np.eye(g.n)
    adj = g.adjacency_lists(reverse=True)
    for i in range(1, g.n + 1):
        share = 1.0 / (len(adj[i]) + 1)
        w[i - 1, i - 1] = share
        for j in adj[i]:
            w[i - 1, j - 1] = share
    return MixingMatrix(w, classify(w) or "row")


def gossip_weights(g: DirectedGraph) -> MixingMatrix:
    """Weights for DSGD/DSGT: Metropolis when bidirected, else uniform in-neighbor rows."""
    return metropolis_weights(g) if g.is_symmetric() else uniform_row_weights(g)


def to_matrix_market(m: MixingMatrix, path) -> None:
    import scipy.io
    import scipy.sparse

    scipy.io.mmwrite(str(path), scipy.sparse.coo_matrix(np.asarray(m.weights)))


__all__ = [
    "MixingMatrix",
    "MixingError",
    "TopologyError",
    "build_pull_matrix",
    "build_push_matrix",
    "classify",
    "gossip_weights",
    "indicator_columns",
    "indicator_power",
    "metropolis_weights",
    "spectral_norm_defect",
    "stationary_vectors",
    "to_matrix_market",
    "uniform_column_weights",
    "uniform_row_weights",
]
