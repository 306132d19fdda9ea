"""Graph sampling for estimating eigenvector centrality on incomplete networks.

The main entry points are :func:`tcec_sample` (the greedy, bound-driven
online sampler), the baseline samplers in :mod:`tcec.sampling`, the bound
diagnostics in :mod:`tcec.bounds` and the evaluation harness in
:mod:`tcec.evaluation`.
"""
from ._backend import BACKEND
from .bounds import BoundReport, verify_bound
from .evaluation import (
    EvalReport,
    evaluate_sample,
    kendall_tau,
    moving_window_stat,
    run_experiment,
    spearman_rho,
)
from .graph import (
    Graph,
    generate_er,
    induced_subgraph,
    largest_strongly_connected_component,
    load_edge_list,
    write_edge_list,
)
from .sampler import Leaderboard, TcecConfig, blended_score, score_candidate, tcec_sample
from .sampling import SampleState, make_rng
from .spectral import CentralityVector, power_iteration, sine_distance

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "CentralityVector",
    "EvalReport",
    "Graph",
    "Leaderboard",
    "SampleState",
    "TcecConfig",
    "blended_score",
    "evaluate_sample",
    "generate_er",
    "induced_subgraph",
    "kendall_tau",
    "largest_strongly_connected_component",
    "load_edge_list",
    "make_rng",
    "moving_window_stat",
    "power_iteration",
    "run_experiment",
    "score_candidate",
    "sine_distance",
    "spearman_rho",
    "tcec_sample",
    "verify_bound",
    "write_edge_list",
]
