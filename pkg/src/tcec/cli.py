"""Command-line interface: ``tcec {generate,sample,experiment,verify-bound,centrality}``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
Precedence of settings: command-line flags, then ``--config`` JSON file, then
built-in defaults.  The effective configuration is written next to every
output as ``<output>.config.json``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import DenseLimitExceeded, verify_bound
from .evaluation import SAMPLERS, run_experiment
from .graph import (
    EdgeListError,
    generate_er,
    induced_subgraph,
    largest_strongly_connected_component,
    load_edge_list,
    write_edge_list,
)
from .sampler import EmptyBorder
from .sampling import make_rng
from .spectral import NoDominantEigenpair, power_iteration

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class ConfigError(Exception):
    pass


DEFAULTS = {
    "generate": {"n": None, "p": None, "directed": False, "seed": 0, "out": None},
    "sample": {
        "graph": None, "directed": False, "weighted": False, "dedup": False,
        "sampler": "tcec", "size": None, "ratio": None, "seed": 0, "out": None,
        "induced_out": None, "p": 0.5, "s": 100, "alpha": None, "k_init": None,
        "snowball_k": 2, "forest_fire_p": 0.7,
    },
    "experiment": {
        "graph": None, "er_n": None, "er_p": None, "directed": False, "weighted": False,
        "dedup": False, "samplers": ["uniform", "rw", "mhrw", "dwrw", "tcec"],
        "ratios": [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4], "repetitions": 10,
        "seed": 0, "window": 0.1, "p": 0.5, "s": 100, "alpha": None,
        "k_init_frac": 0.2, "snowball_k": 2, "forest_fire_p": 0.7,
        "out_dir": None, "jobs": None,
    },
    "verify-bound": {
        "graph": None, "er_n": None, "er_p": None, "directed": False, "weighted": False,
        "dedup": False, "nodes": None, "sampler": "uniform", "size": None, "seed": 0,
        "out": None,
    },
    "centrality": {
        "graph": None, "directed": False, "weighted": False, "dedup": False,
        "tol": 1e-10, "max_iter": 100_000, "out": None,
    },
}


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None
    return parse


def _add_graph_input(p, er=False):
    p.add_argument("--graph", help="edge-list file ('#' comments, 'src dst [weight]')")
    if er:
        p.add_argument("--er-n", type=int, help="generate an Erdos-Renyi graph with this many nodes")
        p.add_argument("--er-p", type=float, help="edge probability for --er-n")
    p.add_argument("--directed", action=argparse.BooleanOptionalAction, default=None,
                   help="treat edges as directed (default: undirected)")
    p.add_argument("--weighted", action=argparse.BooleanOptionalAction, default=None,
                   help="read the third column as edge weight (default: binarize)")
    p.add_argument("--dedup", action=argparse.BooleanOptionalAction, default=None,
                   help="keep the first copy of duplicate edges instead of summing weights")


def _add_tcec_params(p, k_frac=False):
    p.add_argument("--p", type=float, help="TCEC randomization probability (default 0.5)")
    p.add_argument("--s", type=int, help="TCEC leaderboard size (default 100)")
    p.add_argument("--alpha", type=float,
                   help="TCEC blend weight (default 0 undirected, 0.5 directed)")
    if k_frac:
        p.add_argument("--k-init-frac", type=float,
                       help="random-walk initialization as a fraction of m (default 0.2)")
    else:
        p.add_argument("--k-init", type=int, help="random-walk initialization size (default ceil(m/5))")
    p.add_argument("--snowball-k", type=int, help="snowball branching factor (default 2)")
    p.add_argument("--forest-fire-p", type=float, help="forest fire burning probability (default 0.7)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tcec", description="Graph sampling for in-sample eigenvector centrality.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write an Erdos-Renyi edge list")
    p.add_argument("--config", help="JSON file with default values for this command")
    p.add_argument("--n", type=int, help="number of nodes")
    p.add_argument("--p", type=float, help="edge probability")
    p.add_argument("--directed", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output edge-list path")

    p = sub.add_parser("sample", help="sample nodes from a graph")
    p.add_argument("--config")
    _add_graph_input(p)
    p.add_argument("--sampler", choices=sorted(SAMPLERS))
    p.add_argument("--size", type=int, help="sample size m")
    p.add_argument("--ratio", type=float, help="sample size as a fraction of the SCC")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output node list (one original label per line)")
    p.add_argument("--induced-out", help="also write the induced subgraph edge list here")
    _add_tcec_params(p)

    p = sub.add_parser("experiment", help="run the repeated sampling/evaluation harness")
    p.add_argument("--config")
    _add_graph_input(p, er=True)
    p.add_argument("--samplers", type=_csv_list(str), help="comma list, e.g. uniform,rw,tcec")
    p.add_argument("--ratios", type=_csv_list(float), help="comma list of ratios in (0,1]")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--window", type=float, help="moving-window fraction (default 0.1)")
    p.add_argument("--out-dir", help="directory for runs.csv, aggregate.json, failures.json")
    p.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")
    _add_tcec_params(p, k_frac=True)

    p = sub.add_parser("verify-bound", help="evaluate the spectral sine bound for a sample")
    p.add_argument("--config")
    _add_graph_input(p, er=True)
    p.add_argument("--nodes", type=_csv_list(str), help="comma list of node labels")
    p.add_argument("--sampler", choices=sorted(SAMPLERS),
                   help="sampler used when --nodes is absent (default uniform)")
    p.add_argument("--size", type=int, help="sample size when --nodes is absent")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="JSON output path (default stdout)")

    p = sub.add_parser("centrality", help="dump eigenvector centrality as CSV node,score")
    p.add_argument("--config")
    _add_graph_input(p)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--out", help="CSV output path (default stdout)")
    return parser


def effective_config(command, args):
    cfg = dict(DEFAULTS[command])
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        unknown = sorted(set(file_cfg) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _write_sidecar(path, command, cfg):
    if not path:
        return
    with open(f"{path}.config.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"command": command, "version": __version__, **cfg}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _open_out(path):
    if path is None:
        return _Stdout()
    return open(path, "w", encoding="utf-8", newline="\n")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _load_graph(cfg):
    if cfg.get("graph"):
        if not os.path.isfile(cfg["graph"]):
            raise FileNotFoundError(f"graph file not found: {cfg['graph']}")
        g = load_edge_list(cfg["graph"], directed=bool(cfg["directed"]),
                           weighted=bool(cfg["weighted"]), dedup=bool(cfg["dedup"]))
    elif cfg.get("er_n") is not None:
        if cfg.get("er_p") is None:
            raise ConfigError("--er-n needs --er-p")
        _check_prob(cfg["er_p"], "er_p")
        g = generate_er(int(cfg["er_n"]), float(cfg["er_p"]), bool(cfg["directed"]),
                        seed=int(make_rng(cfg["seed"], "graph").integers(2**63 - 1)))
    else:
        raise ConfigError("no input graph: pass --graph" + (" or --er-n/--er-p" if "er_n" in cfg else ""))
    return largest_strongly_connected_component(g)


def _check_prob(p, name, lo_open=False, hi_open=False):
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number") from None
    bad = p < 0 or p > 1 or (lo_open and p == 0) or (hi_open and p == 1) or math.isnan(p)
    if bad:
        raise ConfigError(f"{name}={p} out of range")


def _sampler_params(cfg):
    params = {}
    for key in ("p", "s", "alpha", "snowball_k", "forest_fire_p", "k_init_frac"):
        if cfg.get(key) is not None:
            params[key] = cfg[key]
    if "p" in params:
        _check_prob(params["p"], "p", lo_open=True)
    if params.get("alpha") is not None:
        _check_prob(params["alpha"], "alpha")
    if "forest_fire_p" in params:
        _check_prob(params["forest_fire_p"], "forest_fire_p", lo_open=True, hi_open=True)
    if "s" in params and int(params["s"]) < 1:
        raise ConfigError("s must be >= 1")
    if "snowball_k" in params and int(params["snowball_k"]) < 1:
        raise ConfigError("snowball_k must be >= 1")
    return params


def _draw_sample(g, cfg, m):
    params = _sampler_params(cfg)
    name = cfg["sampler"]
    if name not in SAMPLERS:
        raise ConfigError(f"unknown sampler {name!r}; choose from {', '.join(sorted(SAMPLERS))}")
    rng = make_rng(cfg["seed"], "sample", name)
    if name == "tcec" and cfg.get("k_init") is not None:
        k = int(cfg["k_init"])
        if not 1 <= k < m:
            raise ConfigError(f"need 1 <= k_init < m (k_init={k}, m={m})")
        params["k_init"] = k
    if name == "tcec" and m < 2:
        raise ConfigError("TCEC needs a sample size of at least 2")
    return SAMPLERS[name](g, m, rng, params)


def cmd_generate(cfg):
    if cfg["n"] is None or cfg["p"] is None or not cfg["out"]:
        raise ConfigError("generate needs --n, --p and --out")
    if int(cfg["n"]) < 1:
        raise ConfigError("n must be >= 1")
    _check_prob(cfg["p"], "p")
    g = generate_er(int(cfg["n"]), float(cfg["p"]), bool(cfg["directed"]), seed=int(cfg["seed"]))
    write_edge_list(g, cfg["out"], weighted=False)
    _write_sidecar(cfg["out"], "generate", cfg)


def _sample_size(cfg, n):
    size, ratio = cfg.get("size"), cfg.get("ratio")
    if (size is None) == (ratio is None):
        raise ConfigError("pass exactly one of --size and --ratio")
    if ratio is not None:
        if not 0.0 < float(ratio) <= 1.0:
            raise ConfigError(f"ratio {ratio} outside (0, 1]")
        return max(1, int(round(float(ratio) * n)))
    size = int(size)
    if not 1 <= size <= n:
        raise ConfigError(f"size {size} outside [1, {n}] (largest SCC has {n} nodes)")
    return size


def cmd_sample(cfg):
    if not cfg["out"]:
        raise ConfigError("sample needs --out")
    g = _load_graph(cfg)
    m = _sample_size(cfg, g.n)
    state = _draw_sample(g, cfg, m)
    with _open_out(cfg["out"]) as fh:
        for v in state.order:
            fh.write(f"{g.labels[v]}\n")
    if cfg.get("induced_out"):
        write_edge_list(induced_subgraph(g, state.members), cfg["induced_out"],
                        weighted=bool(cfg["weighted"]))
    _write_sidecar(cfg["out"], "sample", cfg)


def cmd_experiment(cfg):
    if not cfg["out_dir"]:
        raise ConfigError("experiment needs --out-dir")
    for s in cfg["samplers"]:
        if s not in SAMPLERS:
            raise ConfigError(f"unknown sampler {s!r}; choose from {', '.join(sorted(SAMPLERS))}")
    for r in cfg["ratios"]:
        if not 0.0 < float(r) <= 1.0:
            raise ConfigError(f"ratio {r} outside (0, 1]")
    if int(cfg["repetitions"]) < 1:
        raise ConfigError("repetitions must be >= 1")
    _check_prob(cfg["window"], "window", lo_open=True)
    params = _sampler_params(cfg)
    g = _load_graph(cfg)
    jobs = cfg.get("jobs") or os.cpu_count() or 1
    result = run_experiment(g, list(cfg["samplers"]), [float(r) for r in cfg["ratios"]],
                            int(cfg["repetitions"]), int(cfg["seed"]), float(cfg["window"]),
                            params=params, jobs=int(jobs))
    out = cfg["out_dir"]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "runs.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.to_csv())
    with open(os.path.join(out, "aggregate.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.aggregate_json())
    with open(os.path.join(out, "failures.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump([dict(zip(("sampler", "ratio", "repetition", "seed", "reason"), f))
                   for f in result.failures], fh, indent=2)
        fh.write("\n")
    # jobs never changes results; keep it out of the provenance record
    _write_sidecar(os.path.join(out, "experiment"), "experiment",
                   {k: v for k, v in cfg.items() if k != "jobs"})
    print(f"{len(result.rows)} runs, {len(result.failures)} failed -> {out}", file=sys.stderr)


def cmd_verify_bound(cfg):
    g = _load_graph(cfg)
    if cfg.get("nodes"):
        index = g.label_index()
        missing = [lab for lab in cfg["nodes"] if lab not in index]
        if missing:
            raise ConfigError(f"nodes not in the largest SCC: {', '.join(missing)}")
        sample = np.array([index[lab] for lab in cfg["nodes"]], dtype=np.int64)
        if len(set(sample.tolist())) != len(sample):
            raise ConfigError("duplicate node labels in --nodes")
    else:
        if cfg.get("size") is None:
            raise ConfigError("verify-bound needs --nodes or --size")
        m = int(cfg["size"])
        if not 1 <= m <= g.n:
            raise ConfigError(f"size {m} outside [1, {g.n}]")
        sample = _draw_sample(g, cfg, m).members
    report = verify_bound(g, sample)
    payload = {**report.to_dict(), "seed": cfg["seed"],
               "sample": [g.labels[v] for v in sample.tolist()], "config": cfg}
    with _open_out(cfg.get("out")) as fh:
        json.dump(_finite(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_sidecar(cfg.get("out"), "verify-bound", cfg)


def _finite(obj):
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def cmd_centrality(cfg):
    g = _load_graph(cfg)
    mu = power_iteration(g, tol=float(cfg["tol"]), max_iter=int(cfg["max_iter"]))
    if not mu.converged:
        print(f"warning: power iteration stopped after {mu.iterations} iterations "
              f"(residual {mu.residual:.3g})", file=sys.stderr)
    with _open_out(cfg.get("out")) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "score"])
        for lab, val in zip(g.labels, mu.values.tolist()):
            writer.writerow([lab, repr(val)])
    _write_sidecar(cfg.get("out"), "centrality", cfg)


COMMANDS = {
    "generate": cmd_generate,
    "sample": cmd_sample,
    "experiment": cmd_experiment,
    "verify-bound": cmd_verify_bound,
    "centrality": cmd_centrality,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args.command, args)
        COMMANDS[args.command](cfg)
    except (ConfigError, DenseLimitExceeded) as exc:
        print(f"tcec: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, EdgeListError) as exc:
        print(f"tcec: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NoDominantEigenpair, EmptyBorder, ArithmeticError) as exc:
        print(f"tcec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"tcec: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
