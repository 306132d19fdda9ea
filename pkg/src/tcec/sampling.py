"""Sample bookkeeping and the baseline node samplers.

Every sampler returns a :class:`SampleState`, whose ``order`` records the
insertion sequence.  Samplers draw all randomness from a
:class:`numpy.random.Generator`; use :func:`make_rng` to derive one from a
base seed and a tuple of names.
"""
from __future__ import annotations

import warnings
import zlib
from collections import deque

import numpy as np

from ._backend import WALK_DEGREE_WEIGHTED, WALK_METROPOLIS, WALK_SIMPLE, kernels

__all__ = [
    "SampleState",
    "make_rng",
    "uniform_sample",
    "random_walk_sample",
    "random_walk_trajectory",
    "bfs_sample",
    "snowball_sample",
    "forest_fire_sample",
    "forest_fire_burn_count",
    "expansion_sample",
    "NotStronglyConnected",
]

WALK_VARIANTS = {
    "simple": WALK_SIMPLE,
    "degree_weighted": WALK_DEGREE_WEIGHTED,
    "metropolis_hastings": WALK_METROPOLIS,
}


class NotStronglyConnected(ValueError):
    pass


def _key_int(key):
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if isinstance(key, float):
        return zlib.crc32(repr(key).encode("ascii"))
    return int(key)


def make_rng(seed, *keys):
    """Generator for the stream named ``keys`` under base ``seed``.

    Strings and floats are hashed with CRC32, so the derivation is stable
    across processes and Python versions.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class SampleState:
    """A growing node sample with its in-border and in-sample degree cache.

    ``border`` holds the out-of-sample nodes with an edge *into* some member.
    ``in_sample_in_degree[j]`` is the total weight of edges from members to
    ``j`` and is kept for every node.
    """

    def __init__(self, g):
        self.graph = g
        self.mask = np.zeros(g.n, dtype=np.bool_)
        self.order = []
        self.border = set()
        self.in_sample_in_degree = np.zeros(g.n, dtype=np.float64)
        self.incomplete = False

    def __len__(self):
        return len(self.order)

    def __contains__(self, v):
        return bool(self.mask[v])

    @property
    def members(self):
        return np.asarray(self.order, dtype=np.int64)

    def add(self, v):
        """Insert ``v``; returns its out-of-sample in-neighbours."""
        v = int(v)
        if self.mask[v]:
            raise ValueError(f"node {v} already in sample")
        g = self.graph
        self.mask[v] = True
        self.order.append(v)
        self.border.discard(v)
        a, b = g.out_indptr[v], g.out_indptr[v + 1]
        self.in_sample_in_degree[g.out_indices[a:b]] += g.out_weights[a:b]
        a, b = g.in_indptr[v], g.in_indptr[v + 1]
        nbrs = g.in_indices[a:b]
        fresh = nbrs[~self.mask[nbrs]]
        self.border.update(fresh.tolist())
        return fresh

    def extend(self, nodes):
        for v in nodes:
            self.add(v)

    def recompute_border(self):
        """Border computed from scratch (for consistency checks)."""
        g = self.graph
        border = set()
        for i in self.order:
            idx, _ = g.in_neighbors(i)
            border.update(int(j) for j in idx if not self.mask[j])
        return border

    def recompute_in_sample_in_degree(self):
        g = self.graph
        deg = np.zeros(g.n)
        for i in self.order:
            idx, w = g.out_neighbors(i)
            deg[idx] += w
        return deg


def _check_size(g, m):
    if m < 1:
        raise ValueError("sample size must be >= 1")
    if m > g.n:
        raise ValueError(f"sample size {m} exceeds node count {g.n}")


def uniform_sample(g, m, rng):
    """``m`` distinct nodes uniformly without replacement."""
    _check_size(g, m)
    rng = _as_rng(rng)
    state = SampleState(g)
    state.extend(rng.choice(g.n, size=m, replace=False).tolist())
    return state


class _WalkTables:
    """Per-graph transition tables, cached on the graph instance."""

    def __init__(self, g):
        deg = g.total_degrees
        self.degree = np.ascontiguousarray(deg, dtype=np.float64)
        self.cum = {
            WALK_SIMPLE: np.cumsum(g.out_weights),
            WALK_DEGREE_WEIGHTED: np.cumsum(g.out_weights * deg[g.out_indices]),
            WALK_METROPOLIS: np.zeros(0),
        }


def _walk_tables(g):
    tables = g.__dict__.get("_walk_tables")
    if tables is None:
        tables = g.__dict__["_walk_tables"] = _WalkTables(g)
    return tables


def random_walk_trajectory(g, start, n_steps, variant, rng):
    """Node visited after each of ``n_steps`` steps of the chosen walk."""
    code = WALK_VARIANTS[variant]
    rng = _as_rng(rng)
    tables = _walk_tables(g)
    per_step = 2 if code == WALK_METROPOLIS else 1
    u = rng.random(n_steps * per_step)
    return kernels.walk_trajectory(g.out_indptr, g.out_indices, tables.cum[code],
                                   tables.degree, code, int(start), u)


def random_walk_sample(g, m, variant="simple", rng=None, state=None):
    """Distinct nodes visited by a walk along out-edges, until ``m`` are seen.

    ``simple`` moves proportionally to edge weight; ``degree_weighted``
    proportionally to edge weight times the neighbour's total degree;
    ``metropolis_hastings`` proposes a uniform out-neighbour and accepts with
    ``min(1, deg(current) / deg(proposed))``.
    """
    _check_size(g, m)
    if variant not in WALK_VARIANTS:
        raise ValueError(f"unknown random walk variant {variant!r}")
    if not g.is_strongly_connected:
        raise NotStronglyConnected(
            "random walk sampling needs a strongly connected graph; "
            "restrict to the largest SCC first")
    rng = _as_rng(rng)
    if state is None:
        state = SampleState(g)
    cur = int(rng.integers(g.n))
    state.add(cur)
    chunk = max(64, 2 * m)
    while len(state) < m:
        path = random_walk_trajectory(g, cur, chunk, variant, rng)
        fresh = ~state.mask[path]
        if fresh.any():
            cand = path[fresh]
            _, first = np.unique(cand, return_index=True)
            for v in cand[np.sort(first)].tolist():
                state.add(v)
                if len(state) == m:
                    break
        cur = int(path[-1])
        chunk = min(chunk * 2, 1 << 22)
    return state


def bfs_sample(g, m, rng):
    """Breadth-first search along out-edges from a random root.

    If fewer than ``m`` nodes are reachable the reachable set is returned with
    ``incomplete`` set and a warning.
    """
    return snowball_sample(g, m, rng, k=None)


def snowball_sample(g, m, rng, k=2):
    """Snowball sampling: each frontier node recruits up to ``k`` new out-neighbours.

    When a node has at most ``k`` unvisited neighbours all of them are taken
    in id order without consuming randomness, so ``k=None`` (unbounded) is
    exactly BFS.
    """
    _check_size(g, m)
    rng = _as_rng(rng)
    state = SampleState(g)
    root = int(rng.integers(g.n))
    state.add(root)
    queue = deque([root])
    while queue and len(state) < m:
        u = queue.popleft()
        idx, _ = g.out_neighbors(u)
        new = idx[~state.mask[idx]]
        if k is not None and len(new) > k:
            new = np.sort(rng.choice(new, size=k, replace=False))
        for v in new.tolist():
            state.add(v)
            queue.append(v)
            if len(state) == m:
                break
    if len(state) < m:
        state.incomplete = True
        warnings.warn(f"only {len(state)} nodes reachable from root {root}; "
                      f"requested {m}", RuntimeWarning, stacklevel=2)
    return state


def forest_fire_burn_count(rng, p_f):
    """Geometric number of links to burn, mean ``p_f / (1 - p_f)``."""
    return int(rng.geometric(1.0 - p_f)) - 1


def forest_fire_sample(g, m, p_f=0.7, rng=None):
    """Forest fire over out-links, restarting from a fresh random node when the fire dies."""
    _check_size(g, m)
    if not 0.0 < p_f < 1.0:
        raise ValueError("p_f must lie in (0, 1)")
    rng = _as_rng(rng)
    state = SampleState(g)
    while len(state) < m:
        outside = np.flatnonzero(~state.mask)
        seed = int(outside[rng.integers(len(outside))])
        state.add(seed)
        queue = deque([seed])
        while queue and len(state) < m:
            u = queue.popleft()
            x = forest_fire_burn_count(rng, p_f)
            if x == 0:
                continue
            idx, _ = g.out_neighbors(u)
            new = idx[~state.mask[idx]]
            if len(new) > x:
                new = rng.choice(new, size=x, replace=False)
            for v in new.tolist():
                state.add(v)
                queue.append(v)
                if len(state) == m:
                    break
    return state


def _undirected_neighbors(g, v):
    a = g.out_indices[g.out_indptr[v]:g.out_indptr[v + 1]]
    b = g.in_indices[g.in_indptr[v]:g.in_indptr[v + 1]]
    return np.union1d(a, b)


def expansion_sample(g, m, rng):
    """Greedy expansion: add the border node reaching most uncovered nodes.

    The score of ``v`` is ``|N(v) minus (S union N(S))|`` with ``N`` the
    union of in- and out-neighbours; ties are broken uniformly at random.
    """
    _check_size(g, m)
    rng = _as_rng(rng)
    state = SampleState(g)
    covered = np.zeros(g.n, dtype=np.bool_)
    nbrs = {}

    def neighbours(v):
        r = nbrs.get(v)
        if r is None:
            r = nbrs[v] = _undirected_neighbors(g, v)
        return r

    def take(v):
        state.add(v)
        covered[v] = True
        covered[neighbours(v)] = True

    take(int(rng.integers(g.n)))
    while len(state) < m:
        cands = sorted(state.border)
        if not cands:
            outside = np.flatnonzero(~state.mask)
            take(int(outside[rng.integers(len(outside))]))
            continue
        scores = np.array([np.count_nonzero(~covered[neighbours(v)]) for v in cands])
        best = np.flatnonzero(scores == scores.max())
        take(cands[int(best[rng.integers(len(best))])])
    return state
