"""Brute-force and dense reference implementations, plus fixture generators.

Everything here is quadratic or exponential and exists to check the
nearly-linear code paths on small inputs.
"""

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import DisconnectedGraph, InvalidParams, SizeLimit
from .graph import Graph, as_mask

BRUTE_LIMIT = 22
DENSE_LIMIT = 512


# --------------------------------------------------------------------------
# exhaustive cut search


def b_balanced(b):
    """Predicate for :func:`brute_min_conductance`: cuts with both sides at
    least ``b`` of the total volume."""

    def pred(vol, total):
        return np.minimum(vol, total - vol) >= b * total - 1e-12

    return pred


@dataclass
class BruteForceResult:
    best_cut: np.ndarray
    best_conductance: float
    all_qualifying: list = field(default_factory=list)


def brute_min_conductance(g, predicate=None, collect_below=None, chunk=1 << 15):
    """Exact minimum-conductance cut among those accepted by ``predicate``.

    Enumerates all ``2^(n-1) - 1`` proper cuts (vertex ``n-1`` is always on
    the complement side). ``predicate(vol, total)`` receives an array of
    side volumes. When ``collect_below`` is given, every accepted cut with
    conductance ``<= collect_below`` is returned in ``all_qualifying`` as
    ``(mask, conductance)``. Ties go to the smallest subset bitmask.
    """
    n = g.n
    if n > BRUTE_LIMIT:
        raise SizeLimit(f"brute force limited to n <= {BRUTE_LIMIT}")
    shifts = np.arange(n - 1, dtype=np.int64)
    total = g.total_volume
    d = g.degrees[: n - 1]
    best_phi, best_id = np.inf, -1
    collected = []
    count = 1 << (n - 1)
    for start in range(1, count, chunk):
        ids = np.arange(start, min(start + chunk, count), dtype=np.int64)
        bits = ((ids[:, None] >> shifts) & 1).astype(bool)
        bits = np.concatenate([bits, np.zeros((ids.size, 1), dtype=bool)], axis=1)
        vol = bits[:, : n - 1] @ d
        cut = (bits[:, g.tails] != bits[:, g.heads]) @ g.weights
        phi = cut / np.minimum(vol, total - vol)
        if predicate is not None:
            phi = np.where(predicate(vol, total), phi, np.inf)
        i = int(np.argmin(phi))
        if phi[i] < best_phi - 1e-12:
            best_phi, best_id = float(phi[i]), int(ids[i])
        if collect_below is not None:
            for j in np.flatnonzero(phi <= collect_below + 1e-12):
                collected.append((bits[j].copy(), float(phi[j])))
    if best_id < 0:
        return BruteForceResult(np.zeros(n, dtype=bool), np.inf, collected)
    mask = ((best_id >> np.arange(n)) & 1).astype(bool)
    return BruteForceResult(mask, best_phi, collected)


# --------------------------------------------------------------------------
# dense matrices


def _check_dense(n):
    if n > DENSE_LIMIT:
        raise SizeLimit(f"dense path limited to n <= {DENSE_LIMIT}")


def dense_expm(A):
    """Matrix exponential of a symmetric matrix via ``eigh``."""
    A = np.asarray(A, dtype=np.float64)
    _check_dense(A.shape[0])
    A = 0.5 * (A + A.T)
    lam, V = np.linalg.eigh(A)
    return (V * np.exp(lam)) @ V.T


def dense_laplacian(g):
    _check_dense(g.n)
    return g.laplacian.toarray()


def dense_lks(g, s=None):
    """Laplacian of the complete graph on ``s`` with weights ``mu_i mu_j``."""
    _check_dense(g.n)
    w = g.mu.copy()
    if s is not None:
        w = np.where(as_mask(g, s), w, 0.0)
    return np.diag(w * w.sum()) - np.outer(w, w)


def dense_r(g, i):
    _check_dense(g.n)
    e = -g.mu.copy()
    e[i] += 1.0
    return np.outer(e, e)


def dense_certificate(g, dual):
    """``L / 2m + sum_i beta_i R_i - alpha L(K_V)`` assembled entrywise."""
    M = dense_laplacian(g) / g.total_volume - dual.alpha * dense_lks(g)
    for i in np.flatnonzero(dual.beta):
        M += dual.beta[i] * dense_r(g, i)
    return M


def gram_embedding(g, X):
    """Embedding whose Gram matrix is the PSD matrix ``X`` (via ``eigh``)."""
    from .expsketch import Embedding

    _check_dense(g.n)
    lam, V = np.linalg.eigh(0.5 * (X + X.T))
    return Embedding(V * np.sqrt(np.maximum(lam, 0.0)), g.mu)


def dense_accumulator(acc):
    g = acc.g
    H = acc.a * dense_laplacian(g) + acc.c * dense_lks(g)
    for i in np.flatnonzero(acc.b):
        H += acc.b[i] * dense_r(g, i)
    return H


# --------------------------------------------------------------------------
# generators


def path_graph(n):
    return Graph(n, np.arange(n - 1), np.arange(1, n))


def cycle_graph(n):
    return Graph(n, np.arange(n), (np.arange(n) + 1) % n)


def complete_graph(n):
    iu, ju = np.triu_indices(n, 1)
    return Graph(n, iu, ju)


def grid_graph(rows, cols):
    idx = np.arange(rows * cols).reshape(rows, cols)
    tails = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    heads = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return Graph(rows * cols, tails, heads)


def _clique_edges(offset, k):
    iu, ju = np.triu_indices(k, 1)
    return iu + offset, ju + offset


def barbell(k, bridges=1):
    """Two ``K_k`` joined by ``bridges`` edges; returns ``(graph, [side])``."""
    if k < 2 or not 1 <= bridges <= k:
        raise InvalidParams("barbell needs k >= 2 and 1 <= bridges <= k")
    t1, h1 = _clique_edges(0, k)
    t2, h2 = _clique_edges(k, k)
    tb = np.arange(bridges)
    g = Graph(2 * k, np.concatenate([t1, t2, tb]), np.concatenate([h1, h2, tb + k]))
    side = np.zeros(2 * k, dtype=bool)
    side[:k] = True
    return g, [side]


def caterpillar_of_cliques(body, widths, seed=0, bridge_weight=1.0):
    """A body clique ``K_body`` with leg cliques ``K_w`` for ``w`` in ``widths``.

    Each leg hangs off a distinct body vertex (chosen at random) through a
    single edge of weight ``bridge_weight``. Returns ``(graph, legs)`` with
    one mask per leg.
    """
    widths = [int(w) for w in widths]
    if body < 2 or len(widths) > body or any(w < 2 for w in widths):
        raise InvalidParams("caterpillar needs body >= 2, legs of width >= 2, at most body legs")
    rng = np.random.default_rng(seed)
    anchors = rng.choice(body, size=len(widths), replace=False)
    t0, h0 = _clique_edges(0, body)
    tails, heads, weights = [t0], [h0], [np.ones(t0.size)]
    n = body
    legs = []
    for w, anchor in zip(widths, anchors):
        t, h = _clique_edges(n, w)
        tails += [t, np.array([anchor])]
        heads += [h, np.array([n + int(rng.integers(w))])]
        weights += [np.ones(t.size), np.array([float(bridge_weight)])]
        legs.append((n, n + w))
        n += w
    g = Graph(n, np.concatenate(tails), np.concatenate(heads), np.concatenate(weights))
    masks = []
    for lo, hi in legs:
        m = np.zeros(n, dtype=bool)
        m[lo:hi] = True
        masks.append(m)
    return g, masks


def random_regular(n, d, seed=0, attempts=50):
    """Connected random ``d``-regular graph (networkx pairing model)."""
    for a in range(attempts):
        h = nx.random_regular_graph(d, n, seed=seed + 7919 * a)
        if nx.is_connected(h):
            e = np.array(h.edges(), dtype=np.int64)
            return Graph(n, e[:, 0], e[:, 1])
    raise DisconnectedGraph(f"no connected {d}-regular graph on {n} vertices in {attempts} tries")


def planted_bisection(n, p_in, p_out, seed=0, attempts=50):
    """Two equal halves with edge probabilities ``p_in`` / ``p_out``.

    Returns ``(graph, [first_half])``.
    """
    if n % 2 or not (0 <= p_out <= 1 and 0 < p_in <= 1):
        raise InvalidParams("planted bisection needs even n and probabilities in [0, 1]")
    half = n // 2
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    same = (iu < half) == (ju < half)
    prob = np.where(same, p_in, p_out)
    for _ in range(attempts):
        keep = rng.random(iu.size) < prob
        try:
            g = Graph(n, iu[keep], ju[keep])
        except DisconnectedGraph:
            continue
        side = np.zeros(n, dtype=bool)
        side[:half] = True
        return g, [side]
    raise DisconnectedGraph("planted bisection stayed disconnected; raise p_in or p_out")


GENERATORS = {
    "path": lambda n: (path_graph(n), []),
    "cycle": lambda n: (cycle_graph(n), []),
    "complete": lambda n: (complete_graph(n), []),
    "grid": lambda rows, cols: (grid_graph(rows, cols), []),
    "barbell": barbell,
    "caterpillar": caterpillar_of_cliques,
    "random-regular": lambda n, d, seed=0: (random_regular(n, d, seed), []),
    "planted-bisection": planted_bisection,
}


def generate(kind, **params):
    """Dispatch to a named generator; always returns ``(graph, planted_cuts)``."""
    try:
        fn = GENERATORS[kind]
    except KeyError:
        raise InvalidParams(f"unknown generator {kind!r}; choose from {sorted(GENERATORS)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise InvalidParams(f"bad parameters for {kind}: {exc}") from None
