"""Numerical checks of the spectral sine bound for a node sample.

For a sample ``I`` with in-sample Perron vector ``mu_t`` and full-graph
Perron pair ``(lam, mu)``::

    sin(mu|_I, mu_t) <= gamma / separation * tangent

with ``gamma`` the largest singular value of the outside-to-sample block ``B``,
``tangent = sqrt(sum_{i not in I} mu_i^2 / sum_{i in I} mu_i^2)`` and
``separation`` the smallest stretch of ``A_I - lam * I`` over unit vectors
orthogonal to ``mu_t``.  The separation and the full report are dense
computations intended for graphs of at most a few thousand nodes.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.csgraph import connected_components

from .graph import induced_subgraph
from .spectral import power_iteration, restrict, sine_distance

__all__ = [
    "BoundReport",
    "DenseLimitExceeded",
    "dense_limit",
    "compute_gamma",
    "compute_tangent",
    "compute_separation",
    "verify_bound",
    "singular_value_monotonicity_check",
]

DEFAULT_DENSE_LIMIT = 2000
HOLDS_SLACK = 1e-8


class DenseLimitExceeded(ValueError):
    pass


def dense_limit():
    raw = os.environ.get("TCEC_DENSE_LIMIT")
    return int(raw) if raw else DEFAULT_DENSE_LIMIT


@dataclass
class BoundReport:
    gamma: float
    tangent: float
    separation: float
    lhs_sine: float
    rhs_bound: float
    holds: bool
    applicable: bool = True
    reason: str = ""

    def to_dict(self):
        return asdict(self)


def _sample_split(g, sample):
    sample = np.asarray(sample, dtype=np.int64)
    inside = np.zeros(g.n, dtype=np.bool_)
    inside[sample] = True
    return sample, np.flatnonzero(~inside)


def compute_gamma(g, sample, tol=1e-10, max_iter=100_000):
    """Largest singular value of ``B = A[sample, outside]``.

    Power iteration on ``x -> B^T (B x)`` from a positive start; returns 0
    when the sample covers the whole graph or ``B`` is empty.
    """
    sample, outside = _sample_split(g, sample)
    if len(sample) == 0:
        raise ValueError("sample must be nonempty")
    if len(outside) == 0:
        return 0.0
    B = g.adjacency[sample][:, outside].tocsr()
    if B.nnz == 0:
        return 0.0
    Bt = B.T.tocsr()
    x = np.full(B.shape[1], 1.0 / np.sqrt(B.shape[1]))
    sigma2 = 0.0
    for _ in range(max_iter):
        y = Bt @ (B @ x)
        new_sigma2 = float(np.dot(x, y))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        y /= ny
        step = np.linalg.norm(y - x)
        x = y
        if step < tol or abs(new_sigma2 - sigma2) <= 1e-15 * new_sigma2:
            sigma2 = new_sigma2
            break
        sigma2 = new_sigma2
    bx = B @ x
    return float(np.linalg.norm(bx))


def compute_tangent(mu, sample):
    """``sqrt(outside mass / inside mass)`` of the squared centrality."""
    values = mu.values if hasattr(mu, "values") else np.asarray(mu, dtype=np.float64)
    sq = values * values
    inside = np.zeros(len(values), dtype=np.bool_)
    inside[np.asarray(sample, dtype=np.int64)] = True
    mass_in = float(sq[inside].sum())
    if mass_in <= 0.0:
        raise ValueError("tangent undefined: no centrality mass inside the sample")
    return float(np.sqrt(sq[~inside].sum() / mass_in))


def separation_basis(mu_tilde):
    """Orthonormal basis (columns) of the complement of ``mu_tilde``."""
    mu_tilde = np.asarray(mu_tilde, dtype=np.float64)
    return sla.null_space(mu_tilde[None, :])


def compute_separation(g, sample, lam, mu_tilde):
    """Smallest singular value of ``(A_I - lam * Id) Q``.

    ``Q`` spans the vectors of the sample space orthogonal to ``mu_tilde``.
    """
    limit = dense_limit()
    if g.n > limit:
        raise DenseLimitExceeded(
            f"diagnostic is dense-only: n={g.n} exceeds limit {limit} "
            "(raise TCEC_DENSE_LIMIT to override)")
    sample = np.asarray(sample, dtype=np.int64)
    if len(sample) < 2:
        raise ValueError("separation needs a sample of at least 2 nodes")
    mu_tilde = np.asarray(mu_tilde, dtype=np.float64)
    if mu_tilde.shape != (len(sample),):
        raise ValueError("mu_tilde must have one entry per sampled node")
    Am = g.adjacency[sample][:, sample].toarray()
    Q = separation_basis(mu_tilde)
    M = (Am - lam * np.eye(len(sample))) @ Q
    return float(np.linalg.svd(M, compute_uv=False).min())


def _irreducible(adj):
    if adj.shape[0] == 1:
        return adj.nnz > 0
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    return ncomp == 1


def verify_bound(g, sample, tol=1e-12):
    """Evaluate both sides of the sine bound for ``sample``.

    Reducible inputs give a report with ``applicable=False`` rather than an
    exception.
    """
    limit = dense_limit()
    if g.n > limit:
        raise DenseLimitExceeded(
            f"diagnostic is dense-only: n={g.n} exceeds limit {limit} "
            "(raise TCEC_DENSE_LIMIT to override)")
    sample = np.asarray(sample, dtype=np.int64)
    nan = float("nan")
    if not _irreducible(g.adjacency):
        return BoundReport(nan, nan, nan, nan, nan, False, False, "graph is reducible")
    mu = power_iteration(g, tol=tol)
    if len(sample) == g.n:
        # mu restricted to every node is mu itself
        return BoundReport(0.0, 0.0, nan, 0.0, 0.0, True, True, "sample is the whole graph")
    sub = induced_subgraph(g, sample)
    if not _irreducible(sub.adjacency):
        return BoundReport(nan, nan, nan, nan, nan, False, False,
                           "induced sample subgraph is reducible")
    mu_t = power_iteration(sub, tol=tol)
    lhs = sine_distance(restrict(mu, sample), mu_t.values)
    gamma = compute_gamma(g, sample)
    tangent = compute_tangent(mu, sample)
    sep = compute_separation(g, sample, mu.eigenvalue, mu_t.values)
    rhs = gamma / sep * tangent if sep > 0 else float("inf")
    return BoundReport(gamma, tangent, sep, lhs, rhs, bool(lhs <= rhs + HOLDS_SLACK))


def singular_value_monotonicity_check(b, c, atol=1e-10):
    """Check ``s(B) <= s(C)`` for nonnegative ``B, C`` with ``B^T B <= C^T C``."""
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if b.shape != c.shape:
        raise ValueError(f"shape mismatch: {b.shape} vs {c.shape}")
    if np.any(b < 0) or np.any(c < 0):
        raise ValueError("matrices must be nonnegative")
    sb = np.linalg.norm(b, 2) if b.size else 0.0
    sc = np.linalg.norm(c, 2) if c.size else 0.0
    return bool(sb <= sc + atol)
