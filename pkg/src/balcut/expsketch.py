"""Sketched matrix-exponential embeddings.

The candidate primal solution at every iteration is the Gram matrix

    X = 2m D^{-1/2} exp(-A) D^{-1/2} / (I_S . exp(-A)),   A = 2m eps D^{-1/2} H D^{-1/2},

which is never formed. Instead ``k`` random sphere vectors are pushed
through ``exp(-A/2)`` with a Lanczos kernel and rescaled so that the
resulting ``n x k`` embedding has unit mu-variance.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BreakdownNotConverged, DegenerateEmbedding, InvalidParams, SizeLimit
from .kernels import accumulator_expm
from .operators import normalized_operator_matvec

DENSE_LIMIT = 512


@dataclass
class SketchConfig:
    """Parameters of the sketched exponential.

    ``delta`` and ``jl_constant`` fix the sketch dimension
    ``ceil(jl_constant * ln n / delta**2)`` (capped at ``n``), ``eta`` is the
    Krylov accuracy and ``epsilon`` the MMW step. ``method`` picks the
    exponential kernel: ``"krylov"``, ``"dense"`` (one eigendecomposition
    per call) or ``"auto"``, which goes dense for ``n <= dense_threshold``
    where that is cheaper than ``k`` Krylov runs. The Krylov kernel runs
    the sketch columns in blocks of at most ``block_width`` columns, which
    bounds its memory and keeps the cost per vertex flat in ``n``.
    """

    delta: float = 0.25
    jl_constant: float = 4.0
    eta: float = 1e-12
    epsilon: float = 1.0 / 130.0
    rng_seed: int = 0
    max_krylov: int = 256
    threads: int = 1
    method: str = "auto"
    dense_threshold: int = 256
    block_width: int = 32

    def __post_init__(self):
        if self.method not in ("auto", "krylov", "dense"):
            raise InvalidParams("method must be auto, krylov or dense")
        if not 0 < self.delta < 1:
            raise InvalidParams("delta must lie in (0, 1)")
        if not self.eta > 0:
            raise InvalidParams("eta must be positive")
        if not 0 < self.epsilon < 1:
            raise InvalidParams("epsilon must lie in (0, 1)")
        if self.jl_constant <= 0:
            raise InvalidParams("jl_constant must be positive")

    @classmethod
    def paper(cls, **overrides):
        """Constants used in the analysis (delta = 1/512)."""
        return cls(**{"delta": 1.0 / 512.0, **overrides})


@dataclass
class Embedding:
    """Row ``i`` of ``vectors`` is the vector of vertex ``i``."""

    vectors: np.ndarray
    mu: np.ndarray
    normalization: float = 1.0
    v_avg: np.ndarray = field(init=False)
    radii: np.ndarray = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        self.vectors = v
        self.v_avg = self.mu @ v
        self.radii = np.sqrt(np.sum((v - self.v_avg) ** 2, axis=1))

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1]

    @property
    def variance(self):
        """``E_{i~mu} |v_i - v_avg|^2``, equal to ``L(K_V) . X``."""
        return float(self.mu @ self.radii ** 2)

    def gram(self):
        return self.vectors @ self.vectors.T

    def scaled(self, factor):
        """Copy with every vector multiplied by ``factor`` (no recomputation)."""
        out = object.__new__(Embedding)
        out.vectors = self.vectors * factor
        out.mu = self.mu
        out.normalization = self.normalization
        out.v_avg = self.v_avg * factor
        out.radii = self.radii * abs(factor)
        return out


def _as_matvec(op):
    if callable(op):
        return op
    return lambda x: op @ x


def _ritz_coefficients(alphas, betas):
    """``exp(-T) e_1`` per column with the smallest Ritz value factored out."""
    size = len(alphas)
    k = alphas[0].size
    T = np.zeros((k, size, size))
    idx = np.arange(size)
    T[:, idx, idx] = np.array(alphas).T
    if size > 1:
        off = np.array(betas[: size - 1]).T
        T[:, idx[:-1], idx[1:]] = off
        T[:, idx[1:], idx[:-1]] = off
    theta, vecs = np.linalg.eigh(T)
    theta_min = theta[:, 0]
    coeff = np.einsum("kij,kj->ki", vecs, np.exp(-(theta - theta_min[:, None])) * vecs[:, 0, :])
    return coeff, theta_min


def _expm_lanczos(matvec, U, eta, max_dim, check_every=3, rows=None):
    """Columnwise Lanczos approximation of ``exp(-A) U``.

    Every column runs its own Lanczos recurrence (vectorised across the
    block) with full reorthogonalisation. A column has converged once
    ``beta_j |[exp(-T_j) e_1]_j|`` drops below ``eta`` (both measured after
    factoring out ``exp(-theta_min)``, so the criterion is relative to
    ``|exp(-A) u|``). The small eigenproblems are only solved every
    ``check_every`` steps. ``rows``, when given, applies ``A`` to the rows
    of a ``k x n`` block and replaces ``matvec``.
    """
    if rows is None:
        def rows(X):
            return np.asarray(matvec(X.T), dtype=np.float64).reshape(X.shape[::-1]).T
    U = np.asarray(U, dtype=np.float64)
    n, k = U.shape
    norms = np.linalg.norm(U, axis=0)
    live = norms > 0
    if not live.any():
        return np.zeros_like(U)
    safe = np.where(live, norms, 1.0)
    max_dim = max(1, min(max_dim, n + 1))
    # column-major storage: basis[c, s] is the s-th Lanczos vector of column c,
    # so projections against the basis are batched BLAS products
    basis = np.empty((k, min(max_dim, 16), n))
    basis[:, 0, :] = U.T / safe[:, None]
    alphas, betas = [], []
    tiny = 1e-14
    for j in range(max_dim):
        q = basis[:, j, :]
        w = np.ascontiguousarray(rows(q))
        a = np.einsum("kn,kn->k", w, q)
        w -= a[:, None] * q
        if j > 0:
            w -= betas[-1][:, None] * basis[:, j - 1, :]
        B = basis[:, : j + 1, :]
        before = np.einsum("kn,kn->k", w, w)
        for _ in range(2):
            h = np.matmul(B, w[:, :, None])
            w -= np.matmul(h.transpose(0, 2, 1), B)[:, 0, :]
            b2 = np.einsum("kn,kn->k", w, w)
            # a second pass is only needed where cancellation was heavy
            if np.all(b2 >= 0.5 * before):
                break
            before = b2
        b = np.sqrt(b2)
        scale = np.abs(a) + (betas[-1] if betas else 0.0) + 1.0
        broke = b <= tiny * scale
        b = np.where(broke, 0.0, b)
        alphas.append(a)
        betas.append(b)
        size = j + 1
        last = size == max_dim or bool(np.all(broke | ~live))
        if size % check_every == 0 or last:
            coeff, theta_min = _ritz_coefficients(alphas, betas)
            err = b * np.abs(coeff[:, -1])
            if np.all((err <= eta) | ~live):
                out = np.matmul(coeff[:, None, :], basis[:, :size, :])[:, 0, :]
                return (out * (norms * np.exp(-theta_min))[:, None]).T
        if size < max_dim:
            if size == basis.shape[1]:
                grown = np.empty((k, min(max_dim, 2 * size), n))
                grown[:, :size, :] = basis
                basis = grown
            basis[:, size, :] = np.where(broke[:, None], 0.0, w / np.where(broke, 1.0, b)[:, None])
    raise BreakdownNotConverged(
        f"Krylov exponential did not reach eta={eta:g} within {max_dim} steps"
    )


def expv(op, u, eta=1e-12, max_dim=256):
    """Approximate ``exp(-A) u`` for a symmetric operator ``A``.

    Parameters
    ----------
    op : callable or matrix
        Matvec of ``A`` (or anything supporting ``A @ x``).
    u : ndarray
        Vector of length ``n`` or ``n x k`` block (columns handled
        independently).
    eta : float
        Target accuracy relative to ``|exp(-A)| |u|``.
    max_dim : int
        Largest Krylov dimension before giving up.

    Raises
    ------
    BreakdownNotConverged
        If the error estimate stays above ``eta`` at ``max_dim``.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 1:
        return _expm_lanczos(_as_matvec(op), u[:, None], eta, max_dim)[:, 0]
    return _expm_lanczos(_as_matvec(op), u, eta, max_dim)


def sketch_dimension(n, cfg):
    k = math.ceil(cfg.jl_constant * math.log(n) / cfg.delta ** 2)
    return max(1, min(k, n))


def sample_sphere_rows(n, k, rng):
    """``k x n`` matrix whose rows are uniform on the sphere of radius sqrt(n/k).

    When ``k == n`` the rows form a Haar-random orthogonal matrix, so the
    projection is an exact isometry; otherwise rows are independent.
    """
    if k == n:
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        return q * np.sign(np.diag(r))
    rows = rng.standard_normal((k, n))
    rows *= math.sqrt(n / k) / np.linalg.norm(rows, axis=1, keepdims=True)
    return rows


def normalized_laplacian_spectrum(g):
    """Cached eigendecomposition of ``D^{-1/2} L D^{-1/2}`` (dense)."""
    cached = getattr(g, "_normalized_spectrum", None)
    if cached is None:
        if g.n > DENSE_LIMIT:
            raise SizeLimit(f"dense spectrum limited to n <= {DENSE_LIMIT}")
        s = g.sqrt_degrees
        N = g.laplacian.toarray() / s[:, None] / s[None, :]
        nu, V = np.linalg.eigh(0.5 * (N + N.T))
        cached = (np.maximum(nu, 0.0), V, N)
        g._normalized_spectrum = cached
    return cached


def _dense_normalized(acc, epsilon):
    """``2m eps D^{-1/2} H D^{-1/2}`` assembled from the cached normalized
    Laplacian plus rank-two corrections for the ``R_i`` and ``L(K_V)`` terms."""
    g = acc.g
    _, _, N = normalized_laplacian_spectrum(g)
    s = g.sqrt_degrees
    mu_s = g.mu / s
    # D^{-1/2} (diag(b) - b mu^T - mu b^T + (sum b) mu mu^T + c diag(mu) - c mu mu^T) D^{-1/2}
    bs = acc.b / s
    rest = np.diag(acc.b / g.degrees + acc.c * mu_s / s)
    rest -= np.outer(bs, mu_s) + np.outer(mu_s, bs)
    rest += (acc.b.sum() - acc.c) * np.outer(mu_s, mu_s)
    return g.total_volume * epsilon * (acc.a * N + rest)


def trivial_direction(g):
    """Unit vector ``D^{1/2} 1 / |D^{1/2} 1|``, the common null vector of the
    normalised operators."""
    return g.sqrt_degrees / math.sqrt(g.total_volume)


def complement_basis(vhat):
    """Orthonormal ``n x (n-1)`` basis of the complement of unit vector ``vhat``."""
    n = vhat.size
    q, _ = np.linalg.qr(np.column_stack([vhat, np.eye(n)[:, : n - 1]]))
    return q[:, 1:]


def _complement_exp(A, Q):
    """``Q W`` and ``exp(-(lam - lam_min))`` for the eigenpairs ``(lam, W)`` of
    ``A`` restricted to the range of ``Q``. The null direction is left out,
    so the shift is the smallest eigenvalue that actually matters."""
    lam, W = np.linalg.eigh(Q.T @ (0.5 * (A + A.T)) @ Q)
    return Q @ W, np.exp(-(lam - lam[0]))


def _krylov_sketch(acc, n, k, cfg, rng):
    """``exp(-A) U^T`` for a fresh ``k x n`` sphere sketch ``U``, as ``n x k``.

    Sketch rows are drawn and pushed through the Krylov kernel in blocks of
    at most ``cfg.block_width`` columns so no full-size temporaries are needed. Rows
    are drawn serially, so the result does not depend on ``cfg.threads``.
    """
    if k == n:
        blocks = [sample_sphere_rows(n, k, rng)]
    else:
        width = max(1, int(cfg.block_width))
        count = max(int(cfg.threads), -(-k // width))
        blocks = (c.size for c in np.array_split(np.arange(k), count))

    vhat = trivial_direction(acc.g)

    def draw(block):
        if isinstance(block, (int, np.integer)):
            U = rng.standard_normal((block, n))
            U *= math.sqrt(n / k) / np.linalg.norm(U, axis=1, keepdims=True)
        else:
            U = block
        # the operator keeps the complement invariant, so projecting the
        # input projects the output
        return U - np.outer(U @ vhat, vhat)

    def run(U):
        return accumulator_expm(acc, cfg.epsilon, U.T, cfg.eta, cfg.max_krylov, relative=True)

    if cfg.threads > 1:
        with ThreadPoolExecutor(int(cfg.threads)) as pool:
            parts = list(pool.map(run, [draw(b) for b in blocks]))
    else:
        parts = [run(draw(b)) for b in blocks]
    # blocks come back relative to their own shift; align them to the smallest
    theta = min(t for _, t in parts)
    E = np.empty((n, k))
    lo = 0
    for part, t in parts:
        E[:, lo : lo + part.shape[1]] = part * math.exp(-(t - theta))
        lo += part.shape[1]
    return E


def sketch_embedding(g, acc, cfg, rng=None):
    """Sketch of the MMW iterate for accumulated updates ``acc``.

    Returns an :class:`Embedding` with ``E_{i~mu} r_i^2 = 1``.
    """
    if rng is None:
        rng = np.random.Generator(np.random.Philox(cfg.rng_seed))
    k = sketch_dimension(g.n, cfg)
    n = g.n
    eps = cfg.epsilon

    def half_op(y):
        return 0.5 * normalized_operator_matvec(acc, y, eps)

    empty = acc.t == 0 and acc.a == 0 and acc.c == 0 and not np.any(acc.b)
    dense = cfg.method == "dense" or (cfg.method == "auto" and n <= cfg.dense_threshold)
    if dense and n > DENSE_LIMIT:
        raise SizeLimit(f"dense kernel limited to n <= {DENSE_LIMIT}")
    # Everything below works on the complement of D^{1/2} 1. That direction
    # is null for every update and only translates the embedding, but left in
    # it would carry weight exp(0) against exp(-lam_min) for the rest and
    # swamp it once lam_min is large.
    vhat = trivial_direction(g)
    if dense and k == n:
        # a Haar-orthogonal sketch only rotates the embedding, so the factor
        # V exp(-lam/2) already has the exact Gram matrix
        if empty:
            E = complement_basis(vhat)
        elif not np.any(acc.b):
            # H = a L + c L(K_V): the L(K_V) part is a multiple of the identity
            # on the complement, so the cached spectrum of L is enough; the
            # graph is connected, so column 0 is the null direction
            nu, V, _ = normalized_laplacian_spectrum(g)
            E = V[:, 1:] * np.exp(-(g.total_weight * eps * acc.a) * (nu[1:] - nu[1]))
        else:
            V, w = _complement_exp(0.5 * _dense_normalized(acc, eps), complement_basis(vhat))
            E = V * w
    elif dense or empty:
        U = sample_sphere_rows(n, k, rng).T  # n x k
        U -= np.outer(vhat, vhat @ U)
        if empty:
            E = U
        else:
            V, w = _complement_exp(half_op(np.eye(n)), complement_basis(vhat))
            E = (V * w) @ (V.T @ U)
    else:
        E = _krylov_sketch(acc, n, k, cfg, rng)
    raw = Embedding(E / g.sqrt_degrees[:, None], g.mu)
    Z = raw.variance
    if not Z > 1e-300:
        raise DegenerateEmbedding("sketched embedding collapsed to a point")
    emb = raw.scaled(1.0 / math.sqrt(Z))
    emb.normalization = Z
    return emb


def dense_u_epsilon(g, acc, epsilon):
    """Exact ``U_eps(H)`` by eigendecomposition; reference path for ``n <= 512``."""
    if g.n > DENSE_LIMIT:
        raise SizeLimit(f"dense U_eps limited to n <= {DENSE_LIMIT}")
    s = g.sqrt_degrees
    H = acc.matvec(np.eye(g.n))
    A = g.total_volume * epsilon * (H / s[:, None] / s[None, :])
    # exp(-A) restricted to the complement of D^{1/2} 1, where the trace is
    # taken; the null direction only adds a constant to X and is dropped
    V, w = _complement_exp(A, complement_basis(trivial_direction(g)))
    E = (V * w) @ V.T
    return g.total_volume * (E / s[:, None] / s[None, :]) / w.sum()
