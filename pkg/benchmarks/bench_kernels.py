"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--n 10000] [--deg 30] [--repeat 3]

Prints best-of-``repeat`` wall times per kernel and the speed-up.  The
end-to-end row runs a full TCEC sample with each backend swapped in.
"""
import argparse
import time

import numpy as np

import tcec.sampler
import tcec.sampling
from tcec import _backend
from tcec.graph import generate_er, largest_strongly_connected_component
from tcec.sampler import TcecConfig, tcec_sample
from tcec.sampling import _walk_tables


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_scoring(mod, g, mask, cands):
    scorer = mod.CandidateScorer(g.out_indptr, g.out_indices, g.out_weights,
                                 g.in_indptr, g.in_indices, g.in_weights)

    def run():
        for j in cands:
            scorer.score_terms(mask, j)
    return run


def bench_walk(mod, g, steps, rng):
    t = _walk_tables(g)
    u = rng.random(steps)
    return lambda: mod.walk_trajectory(g.out_indptr, g.out_indices, t.cum[0], t.degree, 0, 0, u)


def bench_kendall(mod, n, rng):
    x = np.sort(rng.integers(1000, size=n).astype(float))
    y = rng.random(n)
    return lambda: mod.kendall_counts(x, y)


def bench_tcec(mod, g, m):
    def run():
        saved = tcec.sampler.kernels, tcec.sampling.kernels
        tcec.sampler.kernels = tcec.sampling.kernels = mod
        try:
            g.__dict__.pop("_candidate_scorer", None)
            tcec_sample(g, TcecConfig(m=m, seed=0))
        finally:
            tcec.sampler.kernels, tcec.sampling.kernels = saved
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--deg", type=float, default=30.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if _backend.compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    g = largest_strongly_connected_component(
        generate_er(args.n, args.deg / (args.n - 1), directed=False, seed=0))
    mask = np.zeros(g.n, dtype=np.bool_)
    mask[rng.choice(g.n, size=g.n // 5, replace=False)] = True
    cands = np.flatnonzero(~mask)[:2000].tolist()
    m = g.n // 10

    cases = [
        (f"score_terms x{len(cands)}", lambda mod: bench_scoring(mod, g, mask, cands)),
        ("walk 200k steps", lambda mod: bench_walk(mod, g, 200_000, rng)),
        ("kendall_counts n=200k", lambda mod: bench_kendall(mod, 200_000, rng)),
        (f"tcec_sample m={m}", lambda mod: bench_tcec(mod, g, m)),
    ]
    print(f"graph: n={g.n}, edges={g.num_edges}, best of {args.repeat}")
    print(f"{'kernel':<28}{'python [s]':>12}{'cython [s]':>12}{'speed-up':>10}")
    for name, make in cases:
        t_py = best_of(args.repeat, make(_backend.pure))
        t_cy = best_of(args.repeat, make(_backend.compiled))
        print(f"{name:<28}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
