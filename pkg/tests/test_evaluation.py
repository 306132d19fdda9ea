import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_scc
from oracles import brute_kendall_tau_b, brute_spearman, naive_windows
from tcec.evaluation import (
    CSV_FIELDS,
    UndefinedCorrelation,
    cell_seed,
    evaluate_sample,
    kendall_tau,
    moving_window_stat,
    run_experiment,
    spearman_rho,
)
from tcec.graph import Graph, generate_er, largest_strongly_connected_component
from tcec.sampling import SampleState
from tcec.spectral import power_iteration


def tied_pair(rng, n):
    levels = int(rng.integers(2, max(3, n)))
    return rng.integers(levels, size=n).astype(float), rng.integers(levels, size=n).astype(float)


# ---- global statistics ---------------------------------------------------

@pytest.mark.parametrize("fn", [kendall_tau, spearman_rho])
def test_identical_and_reversed(fn, backend):
    assert fn([1, 2, 3, 4], [10, 20, 30, 40]) == 1.0
    assert fn([1, 2, 3, 4], [40, 30, 20, 10]) == -1.0


@pytest.mark.parametrize("fn", [kendall_tau, spearman_rho])
def test_undefined_cases(fn, backend):
    with pytest.raises(UndefinedCorrelation, match="undefined correlation"):
        fn([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedCorrelation):
        fn([1], [2])
    with pytest.raises(ValueError):
        fn([1, 2], [1, 2, 3])


@pytest.mark.parametrize("seed", range(30))
def test_kendall_matches_brute_force(seed, backend):
    rng = np.random.default_rng(seed)
    x, y = tied_pair(rng, 12) if seed % 3 else (rng.random(12), rng.random(12))
    if len(set(x)) == 1 or len(set(y)) == 1:
        return
    assert kendall_tau(x, y) == pytest.approx(brute_kendall_tau_b(x, y), abs=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_spearman_matches_rank_then_pearson(seed):
    rng = np.random.default_rng(seed)
    x, y = tied_pair(rng, int(rng.integers(3, 60)))
    if len(set(x)) == 1 or len(set(y)) == 1:
        return
    assert spearman_rho(x, y) == pytest.approx(brute_spearman(x, y), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=40))
def test_symmetry_and_monotone_invariance(pairs):
    x = np.array([p[0] for p in pairs], float)
    y = np.array([p[1] for p in pairs], float)
    if len(set(x)) == 1 or len(set(y)) == 1:
        return
    for fn in (kendall_tau, spearman_rho):
        r = fn(x, y)
        assert -1.0 <= r <= 1.0
        assert fn(y, x) == pytest.approx(r, abs=1e-12)
        assert fn(np.exp(x), 3 * y + 1) == pytest.approx(r, abs=1e-12)


def test_kendall_large_untied(backend):
    rng = np.random.default_rng(3)
    x = rng.random(200)
    y = x + rng.normal(scale=0.3, size=200)
    assert kendall_tau(x, y) == pytest.approx(brute_kendall_tau_b(x, y), abs=1e-12)


# ---- moving window -------------------------------------------------------

def test_window_identity_and_reversal():
    t = np.arange(30.0)
    assert moving_window_stat(t, t) == (1.0, 0)
    assert moving_window_stat(t, -t, stat="spearman") == (-1.0, 0)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("stat", ["kendall", "spearman"])
def test_window_matches_naive_loop(seed, stat):
    rng = np.random.default_rng(seed)
    if seed % 2:
        t, e = tied_pair(rng, 50)
    else:
        t, e = rng.random(50), rng.random(50)
    ref_stat = brute_kendall_tau_b if stat == "kendall" else brute_spearman
    try:
        ref = naive_windows(list(t), list(e), 5, ref_stat)
    except ZeroDivisionError:
        with pytest.raises(UndefinedCorrelation):
            moving_window_stat(t, e, 0.1, stat)
        return
    mean, skipped = moving_window_stat(t, e, 0.1, stat)
    assert mean == pytest.approx(ref[0], abs=1e-12)
    assert skipped == ref[1]


@pytest.mark.parametrize("seed", range(5))
def test_window_full_equals_global(seed):
    rng = np.random.default_rng(seed)
    t, e = rng.random(40), rng.random(40)
    assert moving_window_stat(t, e, 1.0)[0] == pytest.approx(kendall_tau(t, e), abs=1e-12)
    assert moving_window_stat(t, e, 1.0, "spearman")[0] == pytest.approx(spearman_rho(t, e),
                                                                          abs=1e-12)


def test_window_errors():
    with pytest.raises(UndefinedCorrelation):
        moving_window_stat(np.ones(20), np.arange(20.0))
    with pytest.raises(ValueError):
        moving_window_stat(np.arange(20.0), np.arange(20.0), 0.0)
    with pytest.raises(ValueError):
        moving_window_stat(np.arange(20.0), np.arange(19.0))


# ---- evaluate_sample -----------------------------------------------------

def test_evaluate_all_nodes(er_small):
    mu = power_iteration(er_small)
    r = evaluate_sample(er_small, mu, np.arange(er_small.n))
    assert r.kendall_global == pytest.approx(1.0, abs=1e-6)
    assert r.spearman_global == pytest.approx(1.0, abs=1e-6)
    assert r.sine <= 1e-8
    assert r.converged_sample_eig


def test_evaluate_four_cycle():
    g = Graph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0], directed=False, symmetrize=True)
    mu = power_iteration(g)
    s = SampleState(g)
    s.extend([0, 1, 2])
    r = evaluate_sample(g, mu, s, sampler="x", ratio=0.75, repetition=2, seed=9)
    # true scores on the sample are all 1/2, so rank statistics are undefined
    assert math.isnan(r.kendall_global) and math.isnan(r.spearman_global)
    assert math.isnan(r.kendall_window_mean) and r.windows_skipped == 0
    cos = (2 + math.sqrt(2)) / (2 * math.sqrt(3))
    assert r.sine == pytest.approx(math.sqrt(1 - cos * cos), rel=1e-8)
    assert r.converged_sample_eig
    assert (r.sampler, r.sample_ratio, r.repetition, r.seed) == ("x", 0.75, 2, 9)


def test_evaluate_disconnected_sample_still_reports():
    g = Graph.from_edges(6, list(range(6)), [1, 2, 3, 4, 5, 0], directed=False, symmetrize=True)
    mu = power_iteration(g)
    r = evaluate_sample(g, mu, [0, 1, 3, 4])
    assert isinstance(r.converged_sample_eig, bool)
    with pytest.raises(ValueError):
        evaluate_sample(g, mu, [0])


def test_window_stats_on_larger_sample(er_small):
    mu = power_iteration(er_small)
    r = evaluate_sample(er_small, mu, np.arange(60))
    assert -1 <= r.kendall_window_mean <= 1 and -1 <= r.spearman_window_mean <= 1
    assert 0 <= r.windows_skipped <= 60 - 6 + 1


# ---- experiments ---------------------------------------------------------

@pytest.fixture(scope="module")
def small_graph():
    return largest_strongly_connected_component(generate_er(150, 0.06, False, seed=11))


def test_cell_seed_stable():
    assert cell_seed(0, "rw", 0.1, 3) == cell_seed(0, "rw", 0.1, 3)
    assert cell_seed(0, "rw", 0.1, 3) != cell_seed(0, "rw", 0.1, 4)
    assert cell_seed(0, "rw", 0.1, 3) != cell_seed(1, "rw", 0.1, 3)


def test_experiment_determinism_and_aggregation(small_graph):
    samplers = ["uniform", "rw", "mhrw", "dwrw", "tcec"]
    a = run_experiment(small_graph, samplers, [0.1, 0.3], repetitions=3, base_seed=5)
    b = run_experiment(small_graph, samplers, [0.1, 0.3], repetitions=3, base_seed=5)
    assert a.to_csv() == b.to_csv()
    assert a.aggregate_json() == b.aggregate_json()
    assert not a.failures
    rows = list(csv.DictReader(io.StringIO(a.to_csv())))
    assert list(rows[0]) == CSV_FIELDS and len(rows) == 5 * 2 * 3
    agg = json.loads(a.aggregate_json())
    for s in samplers:
        for r in ("0.1", "0.3"):
            vals = [float(x["kendall_global"]) for x in rows
                    if x["sampler"] == s and x["ratio"] == r]
            cell = agg[s][r]["kendall_global"]
            assert cell["mean"] == pytest.approx(np.mean(vals), abs=1e-12)
            assert cell["std"] == pytest.approx(np.std(vals, ddof=1), abs=1e-12)
            assert cell["n_runs"] == 3
    best = agg["RW_Best"]["0.1"]["kendall_global"]
    names = {"RW": "rw", "MH": "mhrw", "DW": "dwrw"}
    assert best["mean"] == max(agg[s]["0.1"]["kendall_global"]["mean"]
                               for s in ("rw", "mhrw", "dwrw"))
    assert agg[names[best["variant"]]]["0.1"]["kendall_global"]["mean"] == best["mean"]
    assert agg["RW_Best"]["0.1"]["sine"]["mean"] == min(
        agg[s]["0.1"]["sine"]["mean"] for s in ("rw", "mhrw", "dwrw"))


def test_single_repetition_has_zero_std(small_graph):
    res = run_experiment(small_graph, ["uniform"], [0.2], repetitions=1, base_seed=0)
    assert res.aggregate["uniform"]["0.2"]["kendall_global"]["std"] == 0.0


def test_parallel_matches_serial(small_graph):
    kw = dict(samplers=["uniform", "bfs"], ratios=[0.2], repetitions=2, base_seed=1)
    assert (run_experiment(small_graph, jobs=2, **kw).to_csv()
            == run_experiment(small_graph, jobs=1, **kw).to_csv())


def test_failures_recorded_not_aggregated():
    # walks reject a directed path
    g = Graph.from_edges(30, list(range(29)) + [29], list(range(1, 30)) + [0])
    sub = Graph.from_edges(30, list(range(29)), list(range(1, 30)))
    mu = power_iteration(g)
    res = run_experiment(sub, ["rw"], [0.5], repetitions=2, mu=mu)
    assert len(res.failures) == 2 and not res.rows
    assert all("NotStronglyConnected" in f[-1] for f in res.failures)
    assert res.aggregate["rw"]["0.5"]["kendall_global"]["n_runs"] == 0


def test_experiment_argument_errors(small_graph):
    with pytest.raises(ValueError):
        run_experiment(small_graph, ["nope"], [0.1])
    with pytest.raises(ValueError):
        run_experiment(small_graph, ["uniform"], [1.5])
    with pytest.raises(ValueError):
        run_experiment(small_graph, ["uniform"], [0.1], repetitions=0)


def test_all_samplers_run(small_graph):
    from tcec.evaluation import SAMPLERS
    res = run_experiment(small_graph, sorted(SAMPLERS), [0.2], repetitions=1)
    assert not res.failures
    assert {r.sampler for r in res.rows} == set(SAMPLERS)


def test_tcec_param_passthrough():
    g = random_scc(60, 0.08, np.random.default_rng(0))
    a = run_experiment(g, ["tcec"], [0.3], 1, params={"alpha": 0.0, "p": 1.0, "s": 5})
    b = run_experiment(g, ["tcec"], [0.3], 1, params={"alpha": 1.0, "p": 1.0, "s": 5})
    assert a.rows[0].seed == b.rows[0].seed
