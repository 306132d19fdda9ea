"""Weighted directed graph storage, edge-list I/O, generation and preprocessing.

Edge ``j -> i`` with weight ``w`` is stored as adjacency entry ``A[i, j] = w``,
so row ``i`` of ``A`` lists the in-neighbours of ``i``.  Both the in-CSR
(``A`` itself) and the out-CSR (``A.T``) are kept.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Graph",
    "EdgeListError",
    "load_edge_list",
    "write_edge_list",
    "largest_strongly_connected_component",
    "generate_er",
    "induced_subgraph",
    "weighted_in_degree",
    "weighted_out_degree",
]


def _frozen(arr, dtype):
    out = np.ascontiguousarray(arr, dtype=dtype)
    if out is not arr:
        out.flags.writeable = False
    return out


class EdgeListError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable weighted graph with dense node ids ``0..n-1``.

    Attributes
    ----------
    n : int
        Number of nodes.
    directed : bool
        Whether edges are directed.  Undirected graphs store each edge in
        both directions with equal weight.
    adjacency : scipy.sparse.csr_matrix
        ``A[i, j]`` is the weight of the edge from ``j`` to ``i``.
    labels : list of str
        Original node labels; ``labels[k]`` belongs to internal node ``k``.
    """

    n: int
    directed: bool
    adjacency: sp.csr_matrix
    labels: list = field(repr=False)
    _out: sp.csr_matrix = field(repr=False, default=None)

    @classmethod
    def from_edges(cls, n, src, dst, weights=None, directed=True, labels=None,
                   symmetrize=False):
        """Build a graph from parallel edge arrays.

        Duplicate edges have their weights summed, self-loops and zero-weight
        edges are dropped.  With ``symmetrize=True`` every edge is also added
        in the reverse direction.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if weights is None:
            weights = np.ones(len(src), dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        if len(src) != len(dst) or len(src) != len(weights):
            raise ValueError("src, dst and weights must have equal length")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("edge weights must be finite and nonnegative")
        if len(src) and (src.min() < 0 or dst.min() < 0
                         or src.max() >= n or dst.max() >= n):
            raise ValueError("edge endpoint out of range")
        keep = (src != dst) & (weights > 0)
        src, dst, weights = src[keep], dst[keep], weights[keep]
        if symmetrize:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
            weights = np.concatenate([weights, weights])
        adj = sp.csr_matrix((weights, (dst, src)), shape=(n, n), dtype=np.float64)
        adj.sum_duplicates()
        adj.sort_indices()
        if labels is None:
            labels = [str(k) for k in range(n)]
        return cls._from_adjacency(adj, directed, list(labels))

    @classmethod
    def _from_adjacency(cls, adj, directed, labels):
        adj = sp.csr_matrix(adj, dtype=np.float64)
        adj.eliminate_zeros()
        adj.sort_indices()
        out = adj.T.tocsr()
        out.sort_indices()
        for m in (adj, out):
            m.data.flags.writeable = False
            m.indices.flags.writeable = False
            m.indptr.flags.writeable = False
        return cls(n=adj.shape[0], directed=bool(directed), adjacency=adj,
                   labels=labels, _out=out)

    def __getstate__(self):
        # per-process kernel caches are rebuilt on demand
        return {k: v for k, v in self.__dict__.items()
                if k not in ("_candidate_scorer", "_walk_tables")}

    # CSR views: in_* lists in-neighbours j of i with weight(j -> i)
    @functools.cached_property
    def in_indptr(self):
        return _frozen(self.adjacency.indptr, np.int64)

    @functools.cached_property
    def in_indices(self):
        return _frozen(self.adjacency.indices, np.int32)

    @property
    def in_weights(self):
        return self.adjacency.data

    @functools.cached_property
    def out_indptr(self):
        return _frozen(self._out.indptr, np.int64)

    @functools.cached_property
    def out_indices(self):
        return _frozen(self._out.indices, np.int32)

    @property
    def out_weights(self):
        return self._out.data

    @property
    def num_edges(self):
        """Stored directed edges (undirected edges count twice)."""
        return int(self.adjacency.nnz)

    def in_neighbors(self, i):
        a, b = self.in_indptr[i], self.in_indptr[i + 1]
        return self.in_indices[a:b], self.in_weights[a:b]

    def out_neighbors(self, i):
        a, b = self.out_indptr[i], self.out_indptr[i + 1]
        return self.out_indices[a:b], self.out_weights[a:b]

    def weight(self, src, dst):
        """Weight of the edge ``src -> dst`` (0 if absent)."""
        idx, w = self.in_neighbors(dst)
        k = np.searchsorted(idx, src)
        if k < len(idx) and idx[k] == src:
            return float(w[k])
        return 0.0

    def edges(self):
        """Return ``(src, dst, weight)`` arrays of all stored directed edges."""
        coo = self.adjacency.tocoo()
        order = np.lexsort((coo.row, coo.col))
        return coo.col[order].astype(np.int64), coo.row[order].astype(np.int64), coo.data[order]

    def to_dense(self):
        return self.adjacency.toarray()

    @functools.cached_property
    def in_degrees(self):
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    @functools.cached_property
    def out_degrees(self):
        return np.asarray(self.adjacency.sum(axis=0)).ravel()

    @functools.cached_property
    def total_degrees(self):
        """Weighted in + out degree for directed graphs, plain degree otherwise."""
        if self.directed:
            return self.in_degrees + self.out_degrees
        return self.in_degrees.copy()

    @functools.cached_property
    def is_strongly_connected(self):
        if self.n == 0:
            return False
        ncomp, _ = connected_components(self.adjacency, directed=True, connection="strong")
        return ncomp == 1

    def label_index(self):
        return {lab: k for k, lab in enumerate(self.labels)}

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.directed == other.directed
                and self.labels == other.labels
                and (self.adjacency != other.adjacency).nnz == 0)

    __hash__ = None


def weighted_in_degree(g, i):
    return float(g.in_degrees[i])


def weighted_out_degree(g, i):
    return float(g.out_degrees[i])


_NODE_DECL = "# node "


def load_edge_list(path, directed=True, weighted=False, dedup=False):
    """Read a whitespace-separated edge list.

    Each non-comment line is ``src dst`` or ``src dst weight``; lines starting
    with ``#`` are comments, except ``# node <label>`` which declares a node
    (used to carry isolated nodes and the id order through a round trip).
    Labels are remapped to dense ids in order of first appearance.

    Duplicate edges sum their weights.  For undirected input each line is
    materialised in both directions, so a file listing both ``a b`` and
    ``b a`` doubles the weight; pass ``dedup=True`` to keep only the first
    occurrence of each (unordered, when undirected) pair instead.  When
    ``weighted`` is false a third column is ignored and every edge has
    weight 1.
    """
    index = {}
    labels = []

    def node_id(label):
        k = index.get(label)
        if k is None:
            k = index[label] = len(labels)
            labels.append(label)
        return k

    src, dst, wts = [], [], []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith(_NODE_DECL):
                    decl = line[len(_NODE_DECL):].strip()
                    if decl:
                        node_id(decl)
                continue
            tokens = line.split()
            if len(tokens) not in (2, 3):
                raise EdgeListError(
                    f"expected 2 or 3 tokens, got {len(tokens)}", lineno, path)
            w = 1.0
            if len(tokens) == 3:
                try:
                    parsed = float(tokens[2])
                except ValueError:
                    raise EdgeListError(
                        f"non-numeric weight {tokens[2]!r}", lineno, path) from None
                if not math.isfinite(parsed):
                    raise EdgeListError(f"non-finite weight {tokens[2]!r}", lineno, path)
                if weighted:
                    if parsed < 0:
                        raise EdgeListError(f"negative weight {parsed}", lineno, path)
                    w = parsed
            a, b = node_id(tokens[0]), node_id(tokens[1])
            if dedup:
                key = (a, b) if directed or a <= b else (b, a)
                if key in seen:
                    continue
                seen.add(key)
            src.append(a)
            dst.append(b)
            wts.append(w)

    if not labels:
        raise EdgeListError("empty graph", path=path)
    return Graph.from_edges(len(labels), src, dst, wts, directed=directed,
                            labels=labels, symmetrize=not directed)


def write_edge_list(g, path, weighted=True):
    """Write ``g`` in the format read by :func:`load_edge_list`.

    Undirected edges are written once (``src`` id < ``dst`` id).  Weights
    use ``repr`` so they round-trip exactly.
    """
    src, dst, w = g.edges()
    if not g.directed:
        keep = src < dst
        src, dst, w = src[keep], dst[keep], w[keep]
    labels = g.labels
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# directed={int(g.directed)} nodes={g.n} edges={len(src)}\n")
        for lab in labels:
            fh.write(f"{_NODE_DECL}{lab}\n")
        if weighted:
            for a, b, x in zip(src.tolist(), dst.tolist(), w.tolist()):
                fh.write(f"{labels[a]} {labels[b]} {x!r}\n")
        else:
            for a, b in zip(src.tolist(), dst.tolist()):
                fh.write(f"{labels[a]} {labels[b]}\n")


def induced_subgraph(g, nodes):
    """Subgraph on ``nodes``; node ``k`` of the result is ``nodes[k]`` of ``g``.

    The order of ``nodes`` is preserved, so it doubles as the index remap.
    """
    nodes = np.asarray(nodes, dtype=np.int64).ravel()
    if nodes.size == 0:
        raise ValueError("induced_subgraph needs a nonempty node set")
    if nodes.min() < 0 or nodes.max() >= g.n:
        raise ValueError("node id out of range")
    if len(np.unique(nodes)) != len(nodes):
        raise ValueError("duplicate node ids")
    sub = g.adjacency[nodes][:, nodes]
    return Graph._from_adjacency(sub, g.directed, [g.labels[k] for k in nodes.tolist()])


def largest_strongly_connected_component(g):
    """Induced subgraph on the largest SCC (largest component if undirected).

    Ties on size go to the component holding the smallest node id.  Node
    order inside the component follows the original ids.
    """
    if g.n == 0:
        raise ValueError("empty graph")
    ncomp, comp = connected_components(g.adjacency, directed=True, connection="strong")
    sizes = np.bincount(comp, minlength=ncomp)
    first = np.full(ncomp, g.n, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(g.n))
    # largest size first, then smallest contained id
    best = min(range(ncomp), key=lambda c: (-sizes[c], first[c]))
    nodes = np.flatnonzero(comp == best)
    if len(nodes) == g.n:
        return g
    return induced_subgraph(g, nodes)


def generate_er(n, p, directed=False, seed=0):
    """Erdos-Renyi G(n, p) with unit weights, reproducible for a fixed seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    src_parts, dst_parts = [], []
    # row-by-row keeps memory at O(n) per step even for large n
    for i in range(n):
        if directed:
            hits = np.flatnonzero(rng.random(n - 1) < p)
            targets = hits + (hits >= i)
        else:
            hits = np.flatnonzero(rng.random(n - 1 - i) < p)
            targets = hits + i + 1
        if targets.size:
            src_parts.append(np.full(targets.size, i, dtype=np.int64))
            dst_parts.append(targets.astype(np.int64))
    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    return Graph.from_edges(n, src, dst, None, directed=directed,
                            symmetrize=not directed)
