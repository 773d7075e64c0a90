"""Immutable weighted undirected graphs and the Laplacian-family operators.

Vertex sets are boolean masks of length ``n``; every function taking a set
also accepts an integer index array and converts it with :func:`as_mask`.
"""

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import DisconnectedGraph, EmptyOrFullCut, InvalidParams

# absolute tolerance for conductance/balance comparisons
CUT_TOL = 1e-12


class Graph:
    """Connected undirected graph with positive edge weights.

    Parameters
    ----------
    n : int
        Number of vertices, labelled ``0 .. n-1``.
    tails, heads : array_like of int
        Edge endpoints. Duplicate edges (in either orientation) are merged
        by summing their weights.
    weights : array_like of float, optional
        Edge weights, unit by default.

    Raises
    ------
    InvalidParams
        On self-loops, out-of-range endpoints or non-positive weights.
    DisconnectedGraph
        If the graph has more than one connected component.
    """

    def __init__(self, n, tails, heads, weights=None):
        n = int(n)
        if n < 2:
            raise InvalidParams("a graph needs at least two vertices")
        tails = np.asarray(tails, dtype=np.int64).ravel()
        heads = np.asarray(heads, dtype=np.int64).ravel()
        if tails.shape != heads.shape:
            raise InvalidParams("tails and heads differ in length")
        if weights is None:
            weights = np.ones(tails.shape[0])
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if weights.shape != tails.shape:
            raise InvalidParams("weights and edges differ in length")
        if tails.size and (min(tails.min(), heads.min()) < 0 or max(tails.max(), heads.max()) >= n):
            raise InvalidParams("edge endpoint out of range")
        if np.any(tails == heads):
            raise InvalidParams("self-loops are not allowed")
        if np.any(~(weights > 0)) or not np.all(np.isfinite(weights)):
            raise InvalidParams("edge weights must be positive and finite")

        lo = np.minimum(tails, heads)
        hi = np.maximum(tails, heads)
        upper = sparse.coo_matrix((weights, (lo, hi)), shape=(n, n)).tocsr()
        upper.sum_duplicates()
        upper = upper.tocoo()

        self.n = n
        self.tails = upper.row.astype(np.int64)
        self.heads = upper.col.astype(np.int64)
        self.weights = upper.data.astype(np.float64)
        self.m = int(self.weights.size)

        adj = sparse.coo_matrix(
            (np.concatenate([self.weights, self.weights]),
             (np.concatenate([self.tails, self.heads]),
              np.concatenate([self.heads, self.tails]))),
            shape=(n, n),
        ).tocsr()
        self.adjacency = adj
        self.degrees = np.asarray(adj.sum(axis=1)).ravel()
        if np.any(self.degrees <= 0):
            raise DisconnectedGraph("graph has an isolated vertex")
        ncomp, _ = csgraph.connected_components(adj, directed=False)
        if ncomp != 1:
            raise DisconnectedGraph(f"graph has {ncomp} connected components")

        self.total_volume = float(self.degrees.sum())
        self.mu = self.degrees / self.total_volume
        self.laplacian = (sparse.diags(self.degrees) - adj).tocsr()
        self._sqrt_deg = np.sqrt(self.degrees)

        for arr in (self.tails, self.heads, self.weights, self.degrees, self.mu):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n, edges, weights=None):
        """Build from an iterable of ``(u, v)`` pairs."""
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n, edges[:, 0], edges[:, 1], weights)

    @property
    def total_weight(self):
        """Sum of edge weights, the weighted analogue of ``m``."""
        return 0.5 * self.total_volume

    @property
    def sqrt_degrees(self):
        return self._sqrt_deg

    def edges(self):
        return np.column_stack([self.tails, self.heads])

    def induced_subgraph(self, vertices):
        """Induced subgraphs on ``vertices``, one per connected component.

        Boundary edges are dropped and weights kept. Returns a list of
        ``(graph, original_indices)`` pairs; isolated vertices come back as
        ``(None, [v])`` since a single vertex is not a valid :class:`Graph`.
        """
        idx = np.flatnonzero(as_mask(self, vertices))
        local = -np.ones(self.n, dtype=np.int64)
        local[idx] = np.arange(idx.size)
        keep = (local[self.tails] >= 0) & (local[self.heads] >= 0)
        t, h, w = local[self.tails[keep]], local[self.heads[keep]], self.weights[keep]
        sub = sparse.coo_matrix((w, (t, h)), shape=(idx.size, idx.size))
        ncomp, labels = csgraph.connected_components(sub, directed=False)
        parts = []
        for c in range(ncomp):
            members = np.flatnonzero(labels == c)
            if members.size == 1:
                parts.append((None, idx[members]))
                continue
            relabel = -np.ones(idx.size, dtype=np.int64)
            relabel[members] = np.arange(members.size)
            inside = labels[t] == c
            parts.append((Graph(members.size, relabel[t[inside]], relabel[h[inside]], w[inside]),
                          idx[members]))
        return parts

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, total_volume={self.total_volume:g})"


def largest_component(n, tails, heads, weights=None):
    """Restrict an edge list to its largest connected component.

    Returns ``(n_sub, tails, heads, weights, original_indices)`` with the
    component relabelled ``0 .. n_sub-1``.
    """
    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    if weights is None:
        weights = np.ones(tails.size)
    weights = np.asarray(weights, dtype=np.float64)
    adj = sparse.coo_matrix((np.ones(tails.size), (tails, heads)), shape=(n, n))
    _, labels = csgraph.connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    keep_label = int(np.argmax(sizes))
    members = np.flatnonzero(labels == keep_label)
    relabel = -np.ones(n, dtype=np.int64)
    relabel[members] = np.arange(members.size)
    inside = labels[tails] == keep_label
    return (members.size, relabel[tails[inside]], relabel[heads[inside]],
            weights[inside], members)


def as_mask(g, s):
    """Convert a vertex set (mask or index collection) into a boolean mask."""
    s = np.asarray(s)
    if s.dtype == bool:
        if s.shape != (g.n,):
            raise InvalidParams(f"mask has shape {s.shape}, expected ({g.n},)")
        return s
    idx = s.astype(np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise InvalidParams("vertex index out of range")
    if np.unique(idx).size != idx.size:
        raise InvalidParams("duplicate vertices in set")
    mask = np.zeros(g.n, dtype=bool)
    mask[idx] = True
    return mask


def volume(g, s):
    """Sum of degrees over ``s``."""
    return float(g.degrees[as_mask(g, s)].sum())


def mu(g, i):
    return float(g.mu[i])


def mu_set(g, s):
    return volume(g, s) / g.total_volume


def cut_weight(g, s):
    """Total weight of edges with exactly one endpoint in ``s``."""
    mask = as_mask(g, s)
    return float(g.weights[mask[g.tails] != mask[g.heads]].sum())


def conductance(g, s):
    """Cut weight over the smaller side's volume.

    Raises
    ------
    EmptyOrFullCut
        If ``s`` is empty or the whole vertex set.
    """
    mask = as_mask(g, s)
    vol = g.degrees[mask].sum()
    denom = min(vol, g.total_volume - vol)
    if not mask.any() or mask.all() or denom <= 0:
        raise EmptyOrFullCut("conductance is undefined for the empty or full cut")
    return cut_weight(g, mask) / denom


def balance(g, s):
    """``min(mu(s), mu(complement))``."""
    m = mu_set(g, s)
    return min(m, 1.0 - m)


def is_b_balanced(g, s, b):
    mask = as_mask(g, s)
    vol = g.degrees[mask].sum()
    return bool(min(vol, g.total_volume - vol) >= b * g.total_volume - CUT_TOL)


def _check_rows(g, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.n:
        raise InvalidParams(f"vector has {x.shape[0]} rows, graph has {g.n} vertices")
    return x


def laplacian_apply(g, x):
    """``(D - A) x``; ``x`` may be a vector or an ``n x k`` block."""
    x = _check_rows(g, x)
    return g.laplacian @ x


def lkv_apply(g, x):
    """Apply the Laplacian of the complete graph with weights ``mu_i mu_j``.

    Uses ``(L(K_V) x)_i = mu_i (x_i - mu^T x)``, which costs O(n).
    """
    x = _check_rows(g, x)
    mean = g.mu @ x
    if x.ndim == 1:
        return g.mu * (x - mean)
    return g.mu[:, None] * (x - mean[None, :])


def r_i_apply(g, i, x):
    """Apply ``R_i = (e_i - mu)(e_i - mu)^T``."""
    x = _check_rows(g, x)
    coeff = x[i] - g.mu @ x
    out = -np.multiply.outer(g.mu, coeff) if x.ndim > 1 else -g.mu * coeff
    out[i] += coeff
    return out
