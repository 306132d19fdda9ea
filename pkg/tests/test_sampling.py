import warnings

import numpy as np
import pytest
from scipy import stats

from conftest import random_digraph, random_scc
from oracles import dense_adjacency
from tcec.graph import Graph
from tcec.sampling import (
    NotStronglyConnected,
    SampleState,
    bfs_sample,
    expansion_sample,
    forest_fire_burn_count,
    forest_fire_sample,
    make_rng,
    random_walk_sample,
    random_walk_trajectory,
    snowball_sample,
    uniform_sample,
)

VARIANTS = ["simple", "degree_weighted", "metropolis_hastings"]


def undirected(n, src, dst):
    return Graph.from_edges(n, src, dst, directed=False, symmetrize=True)


def star(k):
    return undirected(k + 1, [0] * k, list(range(1, k + 1)))


def path(n):
    return undirected(n, list(range(n - 1)), list(range(1, n)))


def test_make_rng_streams():
    a = make_rng(3, "x", 0.1).random(5)
    assert np.array_equal(a, make_rng(3, "x", 0.1).random(5))
    assert not np.array_equal(a, make_rng(3, "y", 0.1).random(5))
    assert not np.array_equal(a, make_rng(4, "x", 0.1).random(5))


def test_uniform_full_and_errors(rng):
    g = path(10)
    assert sorted(uniform_sample(g, 10, rng).order) == list(range(10))
    with pytest.raises(ValueError):
        uniform_sample(g, 11, rng)
    with pytest.raises(ValueError):
        uniform_sample(g, 0, rng)


def test_uniform_single_node_frequencies():
    g = path(20)
    rng = np.random.default_rng(0)
    counts = np.bincount([uniform_sample(g, 1, rng).order[0] for _ in range(100_000)],
                         minlength=20)
    assert stats.chisquare(counts).pvalue > 0.001


def test_uniform_determinism():
    g = path(50)
    a = uniform_sample(g, 20, make_rng(1, "u")).order
    assert a == uniform_sample(g, 20, make_rng(1, "u")).order


@pytest.mark.parametrize("variant", VARIANTS)
def test_walk_three_cycle_full(variant, backend):
    g = Graph.from_edges(3, [0, 1, 2], [1, 2, 0])
    s = random_walk_sample(g, 3, variant, np.random.default_rng(0))
    assert sorted(s.order) == [0, 1, 2]


@pytest.mark.parametrize("seed", range(5))
def test_simple_walk_on_star(seed, backend):
    g = star(6)
    rng = np.random.default_rng(seed)
    traj = random_walk_trajectory(g, 3, 10, "simple", rng)
    assert traj.tolist()[0::2] == [0] * 5
    s = random_walk_sample(g, 2, "simple", np.random.default_rng(seed))
    assert 0 in s.order and len(s) == 2


def test_walk_rejects_non_scc(rng):
    g = Graph.from_edges(3, [0, 1], [1, 2])
    with pytest.raises(NotStronglyConnected):
        random_walk_sample(g, 2, "simple", rng)
    with pytest.raises(ValueError):
        random_walk_sample(path(3), 2, "levy", rng)


@pytest.mark.parametrize("variant", VARIANTS)
def test_walk_moves_along_edges(variant, rng, backend):
    g = random_scc(40, 0.1, rng)
    A = dense_adjacency(g)
    traj = random_walk_trajectory(g, 0, 2000, variant, rng)
    prev = 0
    for v in traj.tolist():
        assert v == prev or A[v, prev] > 0
        prev = v
    if variant != "metropolis_hastings":
        assert np.all(traj[1:] != traj[:-1])


def test_simple_walk_transition_frequencies(backend):
    # from node 0 the walk picks an out-neighbour proportionally to weight
    g = Graph.from_edges(4, [0, 0, 0, 1, 2, 3], [1, 2, 3, 0, 0, 0], [1.0, 2.0, 5.0, 1, 1, 1])
    rng = np.random.default_rng(1)
    traj = random_walk_trajectory(g, 0, 200_000, "simple", rng)
    prev = np.concatenate([[0], traj[:-1]])
    nxt = traj[prev == 0]
    counts = np.bincount(nxt, minlength=4)[1:]
    assert stats.chisquare(counts, counts.sum() * np.array([1, 2, 5]) / 8).pvalue > 0.001


def test_degree_weighted_transition_frequencies(backend):
    # hub 0 linked to 1, 2, 3; node 3 gets extra degree from a pendant triangle
    g = undirected(6, [0, 0, 0, 3, 3, 4], [1, 2, 3, 4, 5, 5])
    deg = g.total_degrees
    rng = np.random.default_rng(2)
    traj = random_walk_trajectory(g, 0, 300_000, "degree_weighted", rng)
    prev = np.concatenate([[0], traj[:-1]])
    counts = np.bincount(traj[prev == 0], minlength=4)[1:4]
    expect = deg[[1, 2, 3]] / deg[[1, 2, 3]].sum() * counts.sum()
    assert stats.chisquare(counts, expect).pvalue > 0.001


def test_metropolis_stationary_uniform(er_small, backend):
    traj = random_walk_trajectory(er_small, 0, 1_000_000, "metropolis_hastings",
                                  np.random.default_rng(7))
    counts = np.bincount(traj[::10], minlength=er_small.n)
    assert stats.chisquare(counts).pvalue > 0.001


@pytest.mark.parametrize("variant", VARIANTS)
def test_walk_determinism(er_small, variant):
    a = random_walk_sample(er_small, 50, variant, make_rng(9, "rw")).order
    assert a == random_walk_sample(er_small, 50, variant, make_rng(9, "rw")).order


def test_bfs_path_from_endpoint():
    g = path(8)
    seed = next(s for s in range(1000) if int(np.random.default_rng(s).integers(8)) == 0)
    assert bfs_sample(g, 3, np.random.default_rng(seed)).order == [0, 1, 2]


def naive_bfs(A, root, m):
    n = A.shape[0]
    seen, queue, order = {root}, [root], [root]
    while queue and len(order) < m:
        u = queue.pop(0)
        for v in range(n):
            if A[v, u] > 0 and v not in seen and len(order) < m:
                seen.add(v)
                order.append(v)
                queue.append(v)
    return order


@pytest.mark.parametrize("seed", range(5))
def test_bfs_matches_queue_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_digraph(60, 0.05, rng)
    A = dense_adjacency(g)
    root = int(np.random.default_rng(seed).integers(g.n))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        got = bfs_sample(g, 30, np.random.default_rng(seed)).order
    assert got == naive_bfs(A, root, 30)


def test_bfs_unreachable_sets_flag():
    g = Graph.from_edges(5, [0, 1], [1, 2])
    with pytest.warns(RuntimeWarning):
        s = bfs_sample(g, 5, np.random.default_rng(0))
    assert s.incomplete and len(s) < 5


def test_snowball_saturated_equals_bfs(rng):
    g = random_scc(50, 0.08, rng)
    kmax = int(np.diff(g.out_indptr).max())
    for seed in range(5):
        a = snowball_sample(g, 25, np.random.default_rng(seed), k=kmax)
        b = bfs_sample(g, 25, np.random.default_rng(seed))
        assert a.order == b.order


def test_snowball_branching_limit(rng):
    g = star(10)
    seed = next(s for s in range(1000) if int(np.random.default_rng(s).integers(11)) == 0)
    with pytest.warns(RuntimeWarning):
        s = snowball_sample(g, 11, np.random.default_rng(seed), k=2)
    # the hub recruits two leaves, and leaves have no new neighbours
    assert len(s) == 3 and s.order[0] == 0


@pytest.mark.parametrize("p_f", [0.3, 0.7])
def test_burn_count_distribution(p_f):
    rng = np.random.default_rng(11)
    draws = np.array([forest_fire_burn_count(rng, p_f) for _ in range(100_000)])
    assert draws.min() >= 0
    kmax = 12
    obs = np.bincount(np.minimum(draws, kmax), minlength=kmax + 1)
    pmf = (1 - p_f) * p_f ** np.arange(kmax)
    expect = np.append(pmf, 1 - pmf.sum()) * len(draws)
    assert stats.chisquare(obs, expect).pvalue > 0.001
    assert draws.mean() == pytest.approx(p_f / (1 - p_f), rel=0.03)


def test_forest_fire_full_and_limit(rng):
    g = random_scc(40, 0.1, rng)
    assert sorted(forest_fire_sample(g, g.n, 0.7, rng).order) == list(range(g.n))
    s = forest_fire_sample(g, 10, 1e-12, rng)
    assert len(set(s.order)) == 10
    with pytest.raises(ValueError):
        forest_fire_sample(g, 5, 1.0, rng)


def test_expansion_star_from_hub():
    g = star(5)
    seed = next(s for s in range(1000) if int(np.random.default_rng(s).integers(6)) == 0)
    s = expansion_sample(g, 2, np.random.default_rng(seed))
    assert s.order[0] == 0 and s.order[1] in range(1, 6)


def two_cliques():
    src, dst = [], []
    for block in (range(0, 5), range(5, 10)):
        for a in block:
            for b in block:
                if a < b:
                    src.append(a)
                    dst.append(b)
    src.append(4)
    dst.append(5)
    return undirected(10, src, dst)


def hand_scores(A, members, border):
    n = A.shape[0]
    nb = [set(np.flatnonzero((A[:, v] > 0) | (A[v, :] > 0)).tolist()) for v in range(n)]
    covered = set(members)
    for v in members:
        covered |= nb[v]
    return {v: len(nb[v] - covered) for v in border}


@pytest.mark.parametrize("seed", range(10))
def test_expansion_two_cliques(seed):
    g = two_cliques()
    A = dense_adjacency(g)
    s = expansion_sample(g, 10, np.random.default_rng(seed))
    replay = SampleState(g)
    for v in s.order:
        if len(replay):
            scores = hand_scores(A, replay.order, replay.recompute_border())
            assert scores[v] == max(scores.values())
            far = {4: 5, 5: 4}
            for a, b in far.items():
                if a in replay and b not in replay and b in scores and a == replay.order[-1]:
                    assert v == b
        replay.add(v)


def test_expansion_full(rng):
    g = random_scc(30, 0.1, rng)
    assert sorted(expansion_sample(g, g.n, rng).order) == list(range(g.n))


SAMPLERS = {
    "uniform": lambda g, m, r: uniform_sample(g, m, r),
    "rw": lambda g, m, r: random_walk_sample(g, m, "simple", r),
    "mh": lambda g, m, r: random_walk_sample(g, m, "metropolis_hastings", r),
    "dw": lambda g, m, r: random_walk_sample(g, m, "degree_weighted", r),
    "bfs": lambda g, m, r: bfs_sample(g, m, r),
    "snowball": lambda g, m, r: snowball_sample(g, m, r),
    "forest_fire": lambda g, m, r: forest_fire_sample(g, m, 0.7, r),
    "expansion": lambda g, m, r: expansion_sample(g, m, r),
}


@pytest.mark.parametrize("name", sorted(SAMPLERS))
def test_sampler_contract(name, rng):
    g = random_scc(80, 0.06, rng)
    fn = SAMPLERS[name]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = fn(g, 25, make_rng(5, name))
        b = fn(g, 25, make_rng(5, name))
    assert a.order == b.order
    assert len(set(a.order)) == len(a.order)
    assert len(a) == 25 or a.incomplete
    assert all(0 <= v < g.n for v in a.order)
    assert a.mask.sum() == len(a)


@pytest.mark.parametrize("seed", range(3))
def test_border_and_degree_cache_after_every_insert(seed):
    rng = np.random.default_rng(seed)
    g = random_digraph(150, 0.03, rng)
    A = dense_adjacency(g)
    state = SampleState(g)
    for v in rng.permutation(g.n)[:120].tolist():
        state.add(v)
        assert state.border == state.recompute_border()
        assert not (state.border & set(state.order))
        members = state.order
        np.testing.assert_allclose(state.in_sample_in_degree, A[:, members].sum(axis=1),
                                   rtol=1e-12, atol=1e-12)
    with pytest.raises(ValueError):
        state.add(state.order[0])
