"""The TCEC online sampler: candidate scoring, bounded leaderboard, greedy loop.

A candidate ``j`` outside the sample is scored by

    |b1|^2 + |b1^T U|^2 - |b3|^2

where ``b1`` are the weights of ``j``'s edges into the sample, ``b3`` the
weights of edges into ``j`` from other non-members, and ``U`` the block of
edges from the remaining non-members into the sample.  Adding the maximiser
shrinks the entries of ``B^T B`` for the outside-to-sample block ``B`` and
hence its largest singular value.  The blended score adds
``alpha * in_sample_in_degree(j)`` as a cheap proxy for ``j``'s centrality.
"""
from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .sampling import NotStronglyConnected, SampleState, make_rng, random_walk_sample

__all__ = [
    "Leaderboard",
    "TcecConfig",
    "EmptyBorder",
    "score_terms",
    "score_candidate",
    "blended_score",
    "tcec_sample",
]


class EmptyBorder(RuntimeError):
    pass


class Leaderboard:
    """Bounded max-priority store of ``(score, node)`` with minimum eviction.

    Keeps at most one entry per node.  ``pop`` returns the highest score,
    preferring the smaller node id on ties; on overflow the lowest score is
    evicted, preferring the larger node id on ties.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("leaderboard capacity must be >= 1")
        self.capacity = int(capacity)
        self._keys = []  # sorted (-score, node); best entry first
        self._score = {}

    def __len__(self):
        return len(self._keys)

    def __contains__(self, node):
        return node in self._score

    def __bool__(self):
        return bool(self._keys)

    def insert(self, node, score):
        """Insert or raise ``node``'s score; returns the evicted node, if any."""
        node = int(node)
        score = float(score)
        old = self._score.get(node)
        if old is not None:
            if score <= old:
                return None
            del self._keys[bisect.bisect_left(self._keys, (-old, node))]
        bisect.insort(self._keys, (-score, node))
        self._score[node] = score
        if len(self._keys) > self.capacity:
            _, evicted = self._keys.pop()
            del self._score[evicted]
            return evicted
        return None

    def pop(self):
        """Remove and return ``(node, score)`` of the best entry, or ``None``."""
        if not self._keys:
            return None
        neg, node = self._keys.pop(0)
        del self._score[node]
        return node, -neg

    def items(self):
        return [(node, -neg) for neg, node in self._keys]


@dataclass
class TcecConfig:
    m: int
    k_init: int | None = None
    s: int = 100
    p: float = 0.5
    alpha: float = 0.0
    seed: int = 0

    def resolved(self, n=None):
        k_init = self.k_init if self.k_init is not None else math.ceil(self.m / 5)
        cfg = TcecConfig(self.m, k_init, self.s, self.p, self.alpha, self.seed)
        cfg.validate(n)
        return cfg

    def validate(self, n=None):
        k = self.k_init if self.k_init is not None else math.ceil(self.m / 5)
        if n is not None and self.m > n:
            raise ValueError(f"sample size m={self.m} exceeds node count {n}")
        if not 1 <= k < self.m:
            raise ValueError(f"need 1 <= k_init < m, got k_init={k}, m={self.m}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.s < 1:
            raise ValueError("leaderboard size s must be >= 1")


def _scorer(g):
    cached = g.__dict__.get("_candidate_scorer")
    if cached is None or cached[0] is not kernels:
        scorer = kernels.CandidateScorer(g.out_indptr, g.out_indices, g.out_weights,
                                         g.in_indptr, g.in_indices, g.in_weights)
        cached = g.__dict__["_candidate_scorer"] = (kernels, scorer)
    return cached[1]


def score_terms(g, state, j):
    """``(|b1|^2, |b1^T U|^2, |b3|^2)`` for candidate ``j``."""
    j = int(j)
    if state.mask[j]:
        raise ValueError(f"node {j} is already in the sample")
    return _scorer(g).score_terms(state.mask, j)


def score_candidate(g, state, j):
    b1sq, b1u, b3sq = score_terms(g, state, j)
    return b1sq + b1u - b3sq


def blended_score(g, state, j, alpha):
    """``(1 - alpha) * score_candidate + alpha * in_sample_in_degree(j)``.

    The two terms are combined unscaled; they live on different scales.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    crit = score_candidate(g, state, j)
    return (1.0 - alpha) * crit + alpha * float(state.in_sample_in_degree[j])


def tcec_sample(g, cfg, step_times=None):
    """Grow a sample of ``cfg.m`` nodes with the TCEC greedy criterion.

    A simple random walk collects the first ``k_init`` nodes.  A Bernoulli(p)
    subset of the border is scored into a leaderboard of capacity ``s``; then
    the best entry is repeatedly moved into the sample and each of its
    non-member in-neighbours is scored with probability ``p``.  Stale
    entries are kept; popped entries that became members are skipped.  If the
    leaderboard runs dry a fresh Bernoulli(p) batch of the border is scored.

    If ``step_times`` is a list, the wall time of every greedy step is
    appended to it (seconds, indexed by sample size before the step).
    """
    cfg = cfg.resolved(g.n)
    if not g.is_strongly_connected:
        raise NotStronglyConnected(
            "TCEC needs a strongly connected graph; restrict to the largest SCC first")
    walk_rng = make_rng(cfg.seed, "tcec", "init-walk")
    rng = make_rng(cfg.seed, "tcec", "thinning")
    state = SampleState(g)
    random_walk_sample(g, cfg.k_init, "simple", walk_rng, state=state)

    scorer = _scorer(g)
    mask = state.mask
    isid = state.in_sample_in_degree
    alpha = cfg.alpha
    p = cfg.p
    board = Leaderboard(cfg.s)

    def score_into_board(nodes):
        if len(nodes) == 0:
            return
        picked = nodes if p >= 1.0 else nodes[rng.random(len(nodes)) < p]
        for j in picked.tolist():
            if mask[j]:
                continue
            b1sq, b1u, b3sq = scorer.score_terms(mask, j)
            score = (1.0 - alpha) * (b1sq + b1u - b3sq) + alpha * isid[j]
            board.insert(j, score)

    def refill():
        border = state.border
        if not border:
            raise EmptyBorder(f"border empty at sample size {len(state)} < m={cfg.m}")
        score_into_board(np.fromiter(sorted(border), dtype=np.int64, count=len(border)))

    refill()
    timer = time.perf_counter
    while len(state) < cfg.m:
        t0 = timer() if step_times is not None else 0.0
        while True:
            top = board.pop()
            if top is None:
                refill()
                continue
            v = top[0]
            if not mask[v]:
                break
        fresh = state.add(v)
        score_into_board(fresh)
        if step_times is not None:
            step_times.append(timer() - t0)
    return state
