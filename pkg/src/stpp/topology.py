"""Benchmark digraphs and the pull/push spanning trees extracted from them.

Nodes are labeled 1..n everywhere in this module's public surface. An edge
``(j, i)`` means node ``j`` can send to node ``i``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

FAMILIES = ("di-ring", "ring", "grid", "static-exp", "multi-subring")


class TopologyError(ValueError):
    """Raised for infeasible sizes or graphs that violate connectivity."""


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise TopologyError(f"graph needs at least one node, got n={self.n}")
        edges = frozenset((int(j), int(i)) for j, i in self.edges)
        for j, i in edges:
            if not (1 <= j <= self.n and 1 <= i <= self.n):
                raise TopologyError(f"edge ({j}, {i}) has an endpoint outside 1..{self.n}")
            if j == i:
                raise TopologyError(f"self-loop on node {j}; self-communication is implicit")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        return cls(n, frozenset(edges))

    def out_neighbors(self, j: int) -> list[int]:
        return sorted(i for (s, i) in self.edges if s == j)

    def in_neighbors(self, i: int) -> list[int]:
        return sorted(j for (j, t) in self.edges if t == i)

    def adjacency_lists(self, reverse: bool = False) -> list[list[int]]:
        """Sorted neighbor lists indexed by node (index 0 unused)."""
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for j, i in self.edges:
            if reverse:
                adj[i].append(j)
            else:
                adj[j].append(i)
        for lst in adj:
            lst.sort()
        return adj

    def adjacency_matrix(self) -> np.ndarray:
        """A[i-1, j-1] = 1 iff (j, i) is an edge, i.e. j sends to i."""
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for j, i in self.edges:
            a[i - 1, j - 1] = 1
        return a

    def is_symmetric(self) -> bool:
        return all((i, j) in self.edges for (j, i) in self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass(frozen=True)
class SpanningTree:
    """A spanning tree rooted at ``root``.

    ``link[i-1]`` is the parent of node i for a pull tree and the unique child
    of node i for a push tree; either way it is the next node on the way to
    the root. The root's entry is ``None``.
    """

    n: int
    root: int
    link: tuple
    depth: tuple
    orientation: str  # "pull" | "push"

    def __post_init__(self):
        if self.orientation not in ("pull", "push"):
            raise TopologyError(f"unknown orientation {self.orientation!r}")

    @property
    def diameter(self) -> int:
        return max(self.depth)

    def toward_root(self) -> np.ndarray:
        """0-based index array of the next node toward the root (root maps to itself)."""
        return np.array(
            [self.root - 1 if l is None else l - 1 for l in self.link], dtype=np.int64
        )

    def tree_edges(self) -> list[tuple[int, int]]:
        """Tree links as graph edges (sender, receiver)."""
        out = []
        for node, l in enumerate(self.link, start=1):
            if l is None:
                continue
            out.append((l, node) if self.orientation == "pull" else (node, l))
        return out


@dataclass(frozen=True)
class TreeStats:
    d: int
    counts: tuple
    avg: float
    n: int = field(default=0)


def _require(cond: bool, msg: str):
    if not cond:
        raise TopologyError(msg)


def gen_directed_ring(n: int) -> DirectedGraph:
    _require(n >= 2, f"directed ring needs n >= 2, got {n}")
    return DirectedGraph.from_edges(n, ((i, i % n + 1) for i in range(1, n + 1)))


def gen_ring(n: int) -> DirectedGraph:
    _require(n >= 3, f"ring needs n >= 3, got {n}")
    edges = set()
    for i in range(1, n + 1):
        k = i % n + 1
        edges.add((i, k))
        edges.add((k, i))
    return DirectedGraph.from_edges(n, edges)


def gen_grid(rows: int, cols: int) -> DirectedGraph:
    _require(rows >= 2 and cols >= 2, f"grid needs rows, cols >= 2, got {rows}x{cols}")
    node = lambda r, c: r * cols + c + 1
    edges = set()
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.add((node(r, c), node(r, c + 1)))
                edges.add((node(r, c + 1), node(r, c)))
            if r + 1 < rows:
                edges.add((node(r, c), node(r + 1, c)))
                edges.add((node(r + 1, c), node(r, c)))
    return DirectedGraph.from_edges(rows * cols, edges)


def grid_shape(n: int) -> tuple[int, int]:
    """Most-square factorization rows <= cols of n."""
    rows = max(r for r in range(1, math.isqrt(n) + 1) if n % r == 0)
    return rows, n // rows


def gen_static_exponential(n: int) -> DirectedGraph:
    _require(n >= 2, f"static exponential graph needs n >= 2, got {n}")
    hops = math.ceil(math.log2(n))
    edges = set()
    for i in range(1, n + 1):
        for j in range(hops):
            k = (i - 1 + 2**j) % n + 1
            if k != i:
                edges.add((i, k))
    return DirectedGraph.from_edges(n, edges)


def gen_multi_subring(n: int, m: int) -> DirectedGraph:
    """m directed cycles through node 1 over contiguous blocks of nodes 2..n."""
    _require(m >= 2, f"multi-subring needs m >= 2 subrings, got {m}")
    _require(n >= 2 * m + 1, f"multi-subring with m={m} needs n >= {2 * m + 1}, got {n}")
    edges = set()
    for block in np.array_split(np.arange(2, n + 1), m):
        cycle = [1, *map(int, block), 1]
        edges.update(zip(cycle[:-1], cycle[1:]))
    return DirectedGraph.from_edges(n, edges)


def make_topology(family: str, n: int, m: int | None = None) -> DirectedGraph:
    if family == "di-ring":
        return gen_directed_ring(n)
    if family == "ring":
        return gen_ring(n)
    if family == "grid":
        return gen_grid(*grid_shape(n))
    if family == "static-exp":
        return gen_static_exponential(n)
    if family == "multi-subring":
        return gen_multi_subring(n, 2 if m is None else m)
    raise TopologyError(f"unknown topology family {family!r}; expected one of {FAMILIES}")


def _bfs(adj: list[list[int]], root: int, n: int):
    dist = [-1] * (n + 1)
    pred: list[int | None] = [None] * (n + 1)
    dist[root] = 0
    frontier = [root]
    while frontier:
        nxt = []
        # ascending frontier => first discoverer is the lowest-id candidate
        for u in sorted(frontier):
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    pred[v] = u
                    nxt.append(v)
        frontier = nxt
    return dist, pred


def _reachable_all(adj: list[list[int]], n: int, start: int = 1) -> bool:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == n


def check_strongly_connected(g: DirectedGraph) -> bool:
    return _reachable_all(g.adjacency_lists(), g.n) and _reachable_all(
        g.adjacency_lists(reverse=True), g.n
    )


def _extract(g: DirectedGraph, root: int, orientation: str) -> SpanningTree:
    _require(1 <= root <= g.n, f"root {root} outside 1..{g.n}")
    if not check_strongly_connected(g):
        raise TopologyError("graph is not strongly connected; spanning trees do not exist")
    adj = g.adjacency_lists(reverse=(orientation == "push"))
    dist, pred = _bfs(adj, root, g.n)
    return SpanningTree(
        n=g.n,
        root=root,
        link=tuple(pred[1:]),
        depth=tuple(dist[1:]),
        orientation=orientation,
    )


def extract_pull_tree(g: DirectedGraph, root: int = 1) -> SpanningTree:
    """Shortest-path arborescence from the root along edge direction."""
    return _extract(g, root, "pull")


def extract_push_tree(g: DirectedGraph, root: int = 1) -> SpanningTree:
    """Shortest-path in-tree toward the root; each node's child is its next hop."""
    return _extract(g, root, "push")


def tree_stats(t: SpanningTree) -> TreeStats:
    depth = np.asarray(t.depth)
    d = int(depth.max())
    counts = tuple(int((depth <= k).sum()) for k in range(d + 1))
    avg = sum(t.n - counts[k] for k in range(d)) / t.n
    return TreeStats(d=d, counts=counts, avg=avg, n=t.n)


def central_root(g: DirectedGraph) -> int:
    """Node minimizing the larger of its pull and push tree depths (lowest id on ties)."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    # adjacency_matrix is receiver-major; transpose so dist[a, b] is a -> b
    dist = shortest_path(csr_matrix(g.adjacency_matrix().T), unweighted=True)
    if np.isinf(dist).any():
        raise TopologyError("graph is not strongly connected")
    worst = np.maximum(dist.max(axis=1), dist.max(axis=0))
    total = dist.sum(axis=1) + dist.sum(axis=0)
    order = np.lexsort((np.arange(g.n), total, worst))
    return int(order[0]) + 1


def resolve_root(g: DirectedGraph, root) -> int:
    """Accept a node id or the string 'center'."""
    if root == "center":
        return central_root(g)
    return int(root)


def star_tree(n: int, orientation: str = "pull", root: int = 1) -> SpanningTree:
    """Every non-root node linked directly to the root."""
    link = tuple(None if i == root else root for i in range(1, n + 1))
    depth = tuple(0 if i == root else 1 for i in range(1, n + 1))
    return SpanningTree(n=n, root=root, link=link, depth=depth, orientation=orientation)


def describe(g: DirectedGraph, root: int = 1) -> dict:
    """JSON-ready summary of a graph and its two trees."""
    pull = extract_pull_tree(g, root)
    push = extract_push_tree(g, root)
    sr, sc = tree_stats(pull), tree_stats(push)
    return {
        "n": g.n,
        "root": root,
        "edges": [list(e) for e in g.sorted_edges()],
        "pull_parent": list(pull.link),
        "push_child": list(push.link),
        "pull_depth": list(pull.depth),
        "push_depth": list(push.depth),
        "d_R": sr.d,
        "d_C": sc.d,
        "r_counts": list(sr.counts),
        "c_counts": list(sc.counts),
        "r_avg": sr.avg,
        "c_avg": sc.avg,
    }
