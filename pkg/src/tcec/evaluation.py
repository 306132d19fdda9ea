"""Rank-correlation evaluation of samples and the repeated-experiment harness."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._backend import kernels
from .graph import induced_subgraph
from .sampler import TcecConfig, tcec_sample
from .sampling import (
    bfs_sample,
    expansion_sample,
    forest_fire_sample,
    make_rng,
    random_walk_sample,
    snowball_sample,
    uniform_sample,
)
from .spectral import power_iteration, restrict, sine_distance

__all__ = [
    "UndefinedCorrelation",
    "EvalReport",
    "kendall_tau",
    "spearman_rho",
    "moving_window_stat",
    "evaluate_sample",
    "SAMPLERS",
    "RW_VARIANTS",
    "run_experiment",
    "ExperimentResult",
]

CSV_FIELDS = ["sampler", "ratio", "repetition", "seed", "kendall_global",
              "spearman_global", "kendall_window", "spearman_window",
              "windows_skipped", "sine", "converged"]
METRICS = ["kendall_global", "spearman_global", "kendall_window", "spearman_window", "sine"]


class UndefinedCorrelation(ValueError):
    """Correlation of a constant (or too short) vector."""


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d vectors of equal length")
    if len(x) < 2:
        raise UndefinedCorrelation("undefined correlation: fewer than 2 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelation("undefined correlation: constant vector")
    return x, y


def kendall_tau(x, y):
    """Kendall tau-b, tie corrected, in O(n log n)."""
    x, y = _pair(x, y)
    order = np.lexsort((y, x))
    x_ties, y_ties, joint, swaps = kernels.kendall_counts(x[order], y[order])
    n = len(x)
    total = n * (n - 1) // 2
    num = total - x_ties - y_ties + joint - 2 * swaps
    den = math.sqrt((total - x_ties) * (total - y_ties))
    return max(-1.0, min(1.0, num / den))


def spearman_rho(x, y):
    """Pearson correlation of average ranks."""
    x, y = _pair(x, y)
    rx = rankdata(x)
    ry = rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    r = float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
    return max(-1.0, min(1.0, r))


_STATS = {"kendall": kendall_tau, "spearman": spearman_rho}


def moving_window_stat(truth, estimate, window_frac=0.1, stat="kendall"):
    """Mean rank correlation over sliding windows ordered by ``truth``.

    Entries are sorted by ``truth`` descending (ties by index); windows of
    ``max(2, floor(window_frac * m))`` consecutive entries slide with stride
    one.  Windows where either slice is constant are skipped.  Returns
    ``(mean, skipped)``.
    """
    fn = _STATS[stat]
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape:
        raise ValueError("truth and estimate must have equal length")
    m = len(truth)
    if m < 2:
        raise UndefinedCorrelation("undefined correlation: fewer than 2 observations")
    if not 0.0 < window_frac <= 1.0:
        raise ValueError("window_frac must lie in (0, 1]")
    w = max(2, int(math.floor(window_frac * m + 1e-9)))
    w = min(w, m)
    order = np.lexsort((np.arange(m), -truth))
    t = truth[order]
    e = estimate[order]
    values = []
    skipped = 0
    for start in range(m - w + 1):
        ts = t[start:start + w]
        es = e[start:start + w]
        if np.all(ts == ts[0]) or np.all(es == es[0]):
            skipped += 1
            continue
        values.append(fn(ts, es))
    if not values:
        raise UndefinedCorrelation("undefined correlation: every window is constant")
    return float(np.mean(values)), skipped


@dataclass
class EvalReport:
    sampler: str
    sample_ratio: float
    repetition: int
    seed: int
    kendall_global: float
    spearman_global: float
    kendall_window_mean: float
    spearman_window_mean: float
    windows_skipped: int
    sine: float
    converged_sample_eig: bool

    def csv_row(self):
        return {
            "sampler": self.sampler,
            "ratio": repr(self.sample_ratio),
            "repetition": self.repetition,
            "seed": self.seed,
            "kendall_global": repr(self.kendall_global),
            "spearman_global": repr(self.spearman_global),
            "kendall_window": repr(self.kendall_window_mean),
            "spearman_window": repr(self.spearman_window_mean),
            "windows_skipped": self.windows_skipped,
            "sine": repr(self.sine),
            "converged": int(self.converged_sample_eig),
        }


def _safe(fn, *args):
    try:
        return fn(*args)
    except UndefinedCorrelation:
        return float("nan")


def evaluate_sample(g, mu, state, window_frac=0.1, sampler="", ratio=float("nan"),
                    repetition=0, seed=0):
    """Compare the true centrality on the sample with the in-sample centrality.

    Undefined statistics (constant vectors, every window constant) are
    reported as NaN.  A sample whose induced subgraph has no edges raises
    :class:`~tcec.spectral.NoDominantEigenpair`.
    """
    members = state.members if hasattr(state, "members") else np.asarray(state, dtype=np.int64)
    if len(members) < 2:
        raise ValueError("evaluation needs at least 2 sampled nodes")
    sub = induced_subgraph(g, members)
    mu_t = power_iteration(sub)
    truth = restrict(mu, members)
    est = mu_t.values

    kg = _safe(kendall_tau, truth, est)
    sg = _safe(spearman_rho, truth, est)
    kw = sw = float("nan")
    skipped = 0
    if len(members) >= 10:
        try:
            kw, skipped = moving_window_stat(truth, est, window_frac, "kendall")
            sw, _ = moving_window_stat(truth, est, window_frac, "spearman")
        except UndefinedCorrelation:
            m = len(members)
            skipped = m - max(2, int(math.floor(window_frac * m + 1e-9))) + 1
    return EvalReport(sampler, float(ratio), int(repetition), int(seed), kg, sg, kw, sw,
                      int(skipped), sine_distance(truth, est), bool(mu_t.converged))


def _tcec(g, m, rng, params):
    seed = int(rng.integers(2**63 - 1))
    alpha = params.get("alpha")
    if alpha is None:
        alpha = 0.5 if g.directed else 0.0
    k_init = params.get("k_init")
    if k_init is None:
        k_init = max(1, min(m - 1, math.ceil(params.get("k_init_frac", 0.2) * m)))
    cfg = TcecConfig(m=m, k_init=k_init, s=params.get("s", 100), p=params.get("p", 0.5),
                     alpha=alpha, seed=seed)
    return tcec_sample(g, cfg)


SAMPLERS = {
    "uniform": lambda g, m, rng, params: uniform_sample(g, m, rng),
    "rw": lambda g, m, rng, params: random_walk_sample(g, m, "simple", rng),
    "mhrw": lambda g, m, rng, params: random_walk_sample(g, m, "metropolis_hastings", rng),
    "dwrw": lambda g, m, rng, params: random_walk_sample(g, m, "degree_weighted", rng),
    "bfs": lambda g, m, rng, params: bfs_sample(g, m, rng),
    "snowball": lambda g, m, rng, params: snowball_sample(g, m, rng, params.get("snowball_k", 2)),
    "forest_fire": lambda g, m, rng, params: forest_fire_sample(
        g, m, params.get("forest_fire_p", 0.7), rng),
    "expansion": lambda g, m, rng, params: expansion_sample(g, m, rng),
    "tcec": _tcec,
}
RW_VARIANTS = {"rw": "RW", "mhrw": "MH", "dwrw": "DW"}


def cell_seed(base_seed, sampler, ratio, repetition):
    """Integer seed of one (sampler, ratio, repetition) cell."""
    return int(make_rng(base_seed, sampler, float(ratio), int(repetition)).integers(2**63 - 1))


def _run_cell(args):
    g, mu, sampler, ratio, rep, base_seed, window_frac, params = args
    seed = cell_seed(base_seed, sampler, ratio, rep)
    m = max(2, min(g.n, int(round(ratio * g.n))))
    try:
        state = SAMPLERS[sampler](g, m, np.random.default_rng(seed), params)
        report = evaluate_sample(g, mu, state, window_frac, sampler, ratio, rep, seed)
        return report, None
    except Exception as exc:  # recorded per cell, excluded from aggregation
        return None, (sampler, ratio, rep, seed, f"{type(exc).__name__}: {exc}")


@dataclass
class ExperimentResult:
    rows: list
    failures: list
    aggregate: dict
    rw_best: dict

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for r in self.rows:
            writer.writerow(r.csv_row())
        return buf.getvalue()

    def aggregate_json(self):
        out = dict(self.aggregate)
        if self.rw_best:
            out["RW_Best"] = self.rw_best
        return json.dumps(_jsonable(out), indent=2, sort_keys=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _mean_std(values):
    vals = np.asarray([v for v in values if not math.isnan(v)], dtype=np.float64)
    if len(vals) == 0:
        return float("nan"), float("nan"), 0
    std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    return float(np.mean(vals)), std, int(len(vals))


_REPORT_FIELD = {
    "kendall_global": "kendall_global",
    "spearman_global": "spearman_global",
    "kendall_window": "kendall_window_mean",
    "spearman_window": "spearman_window_mean",
    "sine": "sine",
}


def aggregate_rows(rows, samplers, ratios):
    """``sampler -> ratio -> metric -> {mean, std, n_runs}``."""
    agg = {}
    for s in samplers:
        agg[s] = {}
        for r in ratios:
            cell = [row for row in rows if row.sampler == s and row.sample_ratio == float(r)]
            agg[s][repr(float(r))] = {
                metric: dict(zip(("mean", "std", "n_runs"),
                                 _mean_std([getattr(row, attr) for row in cell])))
                for metric, attr in _REPORT_FIELD.items()
            }
    return agg


def rw_best_column(agg, ratios):
    """Best random-walk variant per (ratio, metric), highest mean (lowest for sine)."""
    present = [s for s in RW_VARIANTS if s in agg]
    if not present:
        return {}
    best = {}
    for r in ratios:
        key = repr(float(r))
        best[key] = {}
        for metric in _REPORT_FIELD:
            cands = [(s, agg[s][key][metric]) for s in present
                     if not math.isnan(agg[s][key][metric]["mean"])]
            if not cands:
                best[key][metric] = {"mean": float("nan"), "std": float("nan"),
                                     "n_runs": 0, "variant": None}
                continue
            pick = min if metric == "sine" else max
            s, cell = pick(cands, key=lambda sc: sc[1]["mean"])
            best[key][metric] = dict(cell, variant=RW_VARIANTS[s])
    return best


def run_experiment(g, samplers, ratios, repetitions=10, base_seed=0, window_frac=0.1,
                   params=None, mu=None, jobs=1):
    """Sample, evaluate and aggregate every (sampler, ratio, repetition) cell.

    ``g`` should already be restricted to its largest SCC.  Failed cells are
    collected in ``failures`` and left out of the aggregate.  Output is
    independent of ``jobs``.
    """
    for s in samplers:
        if s not in SAMPLERS:
            raise ValueError(f"unknown sampler {s!r}; choose from {sorted(SAMPLERS)}")
    for r in ratios:
        if not 0.0 < r <= 1.0:
            raise ValueError(f"ratio {r} outside (0, 1]")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    params = dict(params or {})
    if mu is None:
        mu = power_iteration(g)
    tasks = [(g, mu, s, float(r), rep, base_seed, window_frac, params)
             for s in samplers for r in ratios for rep in range(repetitions)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=1))
    else:
        results = [_run_cell(t) for t in tasks]
    rows = [r for r, _ in results if r is not None]
    failures = [f for _, f in results if f is not None]
    agg = aggregate_rows(rows, samplers, ratios)
    return ExperimentResult(rows, failures, agg, rw_best_column(agg, ratios))
