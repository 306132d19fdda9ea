import numpy as np
import pytest

from tcec import _backend
from tcec.graph import Graph, generate_er, largest_strongly_connected_component

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=["python", "cython"])
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    if request.param == "cython":
        if _backend.compiled is None:
            pytest.skip("compiled kernels not built")
        mod = _backend.compiled
    else:
        mod = _backend.pure
    import tcec.evaluation
    import tcec.sampler
    import tcec.sampling
    for m in (tcec.sampler, tcec.sampling, tcec.evaluation):
        monkeypatch.setattr(m, "kernels", mod)
    return request.param


def random_digraph(n, p, rng, weighted=True, directed=True):
    """Random graph with positive weights; no SCC restriction."""
    src, dst, w = [], [], []
    for i in range(n):
        for j in range(n):
            if i == j or (not directed and j < i):
                continue
            if rng.random() < p:
                src.append(i)
                dst.append(j)
                w.append(float(rng.uniform(0.5, 3.0)) if weighted else 1.0)
    return Graph.from_edges(n, src, dst, w, directed=directed, symmetrize=not directed)


def random_scc(n, p, rng, **kw):
    while True:
        g = largest_strongly_connected_component(random_digraph(n, p, rng, **kw))
        if g.n >= max(3, n // 2):
            return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def er_small():
    return largest_strongly_connected_component(generate_er(200, 0.05, False, seed=3))
