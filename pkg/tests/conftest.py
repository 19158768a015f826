import numpy as np
import pytest
from hypothesis import strategies as st

from stpp.topology import DirectedGraph

_acceptance = {}


def random_strong_digraph(rng: np.random.Generator, n: int, extra: float = 0.15) -> DirectedGraph:
    """A random Hamiltonian cycle (so strongly connected) plus random extra edges."""
    perm = rng.permutation(n) + 1
    edges = {(int(perm[k]), int(perm[(k + 1) % n])) for k in range(n)} if n > 1 else set()
    mask = rng.random((n, n)) < extra
    for j, i in zip(*np.nonzero(mask)):
        if i != j:
            edges.add((int(j) + 1, int(i) + 1))
    return DirectedGraph.from_edges(n, edges)


@st.composite
def strong_digraphs(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    extra = draw(st.sampled_from([0.0, 0.1, 0.3, 0.7]))
    return random_strong_digraph(np.random.default_rng(seed), n, extra)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _acceptance.items():
        name = nodeid.split("::")[-1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
