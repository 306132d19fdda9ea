"""Eigenvector centrality by power iteration, plus small vector-geometry helpers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "CentralityVector",
    "NoDominantEigenpair",
    "power_iteration",
    "sine_distance",
    "restrict",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


class NoDominantEigenpair(ArithmeticError):
    pass


@dataclass
class CentralityVector:
    values: np.ndarray
    eigenvalue: float
    converged: bool
    iterations: int
    residual: float

    def __len__(self):
        return len(self.values)


def _as_operator(g):
    if sp.issparse(g):
        return sp.csr_matrix(g, dtype=np.float64)
    if isinstance(g, np.ndarray):
        return np.asarray(g, dtype=np.float64)
    return g.adjacency


def _cycle_average(A, anchor, log_norms):
    """Perron vector from one period of an oscillating iteration.

    The normalised iterates ``u_0 = anchor, u_1, ..., u_{p-1}`` repeat with
    period ``p``.  With ``lambda^p`` the product of the step norms,
    ``sum_k A^k u_0 / lambda^k`` cancels every eigenvector whose eigenvalue is
    ``lambda`` times a nontrivial ``p``-th root of unity, leaving the Perron
    vector.  Returns ``(vector, residual)``.
    """
    p = len(log_norms)
    log_lam = sum(log_norms) / p
    u = anchor.copy()
    acc = u.copy()
    log_scale = 0.0
    for k in range(1, p):
        u = A @ u
        u /= np.linalg.norm(u)
        log_scale += log_norms[k - 1] - log_lam
        acc += np.exp(log_scale) * u
    acc /= np.linalg.norm(acc)
    Ax = A @ acc
    lam = np.linalg.norm(Ax)
    res = np.linalg.norm(Ax / lam - acc) if lam > 0 else np.inf
    return acc, res


def power_iteration(g, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=None):
    """Principal eigenpair of the adjacency matrix of ``g``.

    ``g`` may be a :class:`~tcec.graph.Graph`, a scipy sparse matrix or a dense
    array ``A`` with ``A[i, j]`` the weight of edge ``j -> i``.  Iterates
    ``v <- A v / |A v|`` from the uniform vector (or, if ``seed`` is given, a
    random strictly positive vector) until successive iterates differ by less
    than ``tol`` in 2-norm.

    Irreducible but periodic matrices (bipartite graphs, directed cycles)
    make the iterates cycle instead of settling.  The iterate at every
    power-of-two step is kept as an anchor; if the sequence returns to it
    after ``p >= 2`` steps, the Perron vector is recovered from that period
    (see :func:`_cycle_average`).  Runs that hit ``max_iter`` are returned
    with ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = _as_operator(g)
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty graph")
    nnz = A.nnz if sp.issparse(A) else np.count_nonzero(A)
    if nnz == 0:
        raise NoDominantEigenpair("no dominant eigenpair: matrix has no edges")

    if seed is None:
        v = np.full(n, 1.0 / np.sqrt(n))
    else:
        v = np.random.default_rng(seed).uniform(0.5, 1.5, size=n)
        v /= np.linalg.norm(v)

    anchor = None
    log_norms = []
    converged = False
    it = 0
    delta = np.inf
    while it < max_iter:
        if it >= 2 and it & (it - 1) == 0:
            anchor = v.copy()
            log_norms = []
        w = A @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise NoDominantEigenpair("no dominant eigenpair: iterate vanished")
        w /= norm
        it += 1
        delta = np.linalg.norm(w - v)
        if delta < tol:
            v = w
            converged = True
            break
        if anchor is not None:
            log_norms.append(np.log(norm))
            if len(log_norms) >= 2 and np.linalg.norm(w - anchor) < tol:
                x, res = _cycle_average(A, anchor, log_norms)
                if res <= tol:
                    v = x
                    delta = res
                    converged = True
                    break
                anchor = None
        v = w

    Av = A @ v
    eigenvalue = float(np.linalg.norm(Av))
    return CentralityVector(values=v, eigenvalue=eigenvalue, converged=converged,
                            iterations=it, residual=float(delta))


def sine_distance(u, v):
    """Sine of the angle between the lines spanned by ``u`` and ``v``.

    Evaluated as the norm of the component of ``u`` orthogonal to ``v``
    (unit vectors), which keeps full relative accuracy for nearly parallel
    inputs where ``sqrt(1 - cos^2)`` would bottom out near 1e-8.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError("vectors must have equal length")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("sine distance undefined for a zero vector")
    u = u / nu
    v = v / nv
    c = float(np.dot(u, v))
    return float(min(1.0, np.linalg.norm(u - c * v)))


def restrict(v, nodes):
    """Entries of ``v`` at ``nodes``, in the order given."""
    values = v.values if isinstance(v, CentralityVector) else np.asarray(v)
    return values[np.asarray(nodes, dtype=np.int64)]
