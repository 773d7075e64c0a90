"""Randomised checks of the geometric and linear-algebra identities the
algorithm relies on. Used by the ``selftest`` command and the test suite.

Every check returns the worst relative error (or worst violation) seen, so
callers can compare against their own tolerance.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .expsketch import Embedding, SketchConfig, dense_u_epsilon, expv, sketch_embedding
from .graph import Graph, as_mask
from .operators import UpdateAccumulator
from .reference import dense_expm, dense_laplacian, dense_lks, dense_r


@dataclass
class CheckResult:
    name: str
    instances: int
    worst: float
    passed: bool

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}: {self.instances} instances, worst {self.worst:.3g}"


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def random_graph(rng, n_max=64, p=None):
    """Connected random weighted graph: a random spanning tree plus extra edges."""
    n = int(rng.integers(3, n_max + 1))
    perm = rng.permutation(n)
    parents = [perm[rng.integers(0, i)] for i in range(1, n)]
    tails, heads = list(perm[1:]), parents
    p = p if p is not None else rng.uniform(0.02, 0.3)
    iu, ju = np.triu_indices(n, 1)
    extra = rng.random(iu.size) < p
    tails = np.concatenate([tails, iu[extra]])
    heads = np.concatenate([heads, ju[extra]])
    w = rng.uniform(0.1, 3.0, size=tails.size)
    return Graph(n, tails, heads, w)


def random_embedding(rng, g, d_max=8):
    d = int(rng.integers(1, d_max + 1))
    return Embedding(rng.standard_normal((g.n, d)) * rng.uniform(0.1, 5.0), g.mu)


def random_subset(rng, n):
    mask = rng.random(n) < rng.uniform(0.1, 0.9)
    if not mask.any():
        mask[rng.integers(n)] = True
    return mask


# --------------------------------------------------------------------------
# individual identities; each returns an error (0 is exact)


def fact_mean(g, emb):
    """``E_mu r_i^2 = 1/2 E_{mu x mu} |v_i - v_j|^2 = L(K_V) . X``."""
    V, mu = emb.vectors, g.mu
    lhs = float(mu @ emb.radii ** 2)
    sq = np.sum(V * V, axis=1)
    pair = 0.5 * float(mu @ (sq[:, None] + sq[None, :] - 2 * V @ V.T) @ mu)
    mat = float(np.sum(dense_lks(g) * emb.gram()))
    return max(_rel(lhs, pair), _rel(lhs, mat))


def star_operator(g, s, outside=True):
    """``sum_{i} mu_i R_i - mu(S) L(K_V) + L(K_S)`` with the sum over the
    complement of ``S`` (``outside=True``) or over ``S`` itself."""
    mask = as_mask(g, s)
    M = np.zeros((g.n, g.n))
    for i in np.flatnonzero(~mask if outside else mask):
        M += g.mu[i] * dense_r(g, i)
    return M - g.mu[mask].sum() * dense_lks(g) + dense_lks(g, mask)


def fact_star(g, s):
    """``sum_{i notin S} mu_i R_i >= mu(S) L(K_V) - L(K_S)``: returns the
    negative part of the smallest eigenvalue of the difference, relative to
    its norm. The sum runs over the complement; with the sum over ``S`` the
    inequality already fails for a single low-radius vertex."""
    M = star_operator(g, s)
    lam = np.linalg.eigvalsh(M)
    return max(0.0, -lam[0]) / max(1.0, abs(lam).max())


def fact_subset(g, emb, s):
    """``E_{mu_S x mu_S} |v_i - v_j|^2 = 2 / mu(S)^2 L(K_S) . X``."""
    mask = as_mask(g, s)
    w = np.where(mask, g.mu, 0.0)
    ms = w.sum()
    V = emb.vectors
    sq = np.sum(V * V, axis=1)
    pair = float((w / ms) @ (sq[:, None] + sq[None, :] - 2 * V @ V.T) @ (w / ms))
    mat = 2.0 / ms ** 2 * float(np.sum(dense_lks(g, mask) * emb.gram()))
    return _rel(pair, mat)


def fact_identity(g):
    """``I - vhat vhat^T = 2m D^{-1/2} L(K_V) D^{-1/2}``."""
    s = g.sqrt_degrees
    vhat = s / math.sqrt(g.total_volume)
    lhs = np.eye(g.n) - np.outer(vhat, vhat)
    rhs = g.total_volume * dense_lks(g) / s[:, None] / s[None, :]
    return float(np.abs(lhs - rhs).max())


def fact_r_i(g, emb, i):
    """``R_i . X = |v_i - v_avg|^2``."""
    return _rel(float(np.sum(dense_r(g, i) * emb.gram())), float(emb.radii[i] ** 2))


def fact_triangle(v, u, t):
    """``(|v - t| - |u - t|)^2 <= |v - u|^2``; returns the relative excess."""
    lhs = (np.linalg.norm(v - t) - np.linalg.norm(u - t)) ** 2
    rhs = np.linalg.norm(v - u) ** 2
    return max(0.0, lhs - rhs) / max(1.0, rhs)


def fact_exp(g, rng):
    """``exp(M) vhat = vhat`` whenever ``M vhat = 0``."""
    n = g.n
    vhat = g.sqrt_degrees / math.sqrt(g.total_volume)
    P = np.eye(n) - np.outer(vhat, vhat)
    B = rng.standard_normal((n, n))
    M = P @ (B + B.T) @ P / math.sqrt(n)
    return float(np.abs(dense_expm(M) @ vhat - vhat).max())


def _sgn_sq(y):
    return np.where(y >= 0, 1.0, -1.0) * y * y


def fact_scalar(y, z):
    """Worst relative violation of the three scalar inequalities for ``y >= z``."""
    y, z = max(y, z), min(y, z)
    scale = max(1.0, (abs(y) + abs(z)) ** 2)
    e1 = (y + z) ** 2 - 2 * (y * y + z * z)
    e2 = abs(_sgn_sq(y) - _sgn_sq(z)) - (y - z) * (abs(y) + abs(z))
    e3 = (y - z) ** 2 - 2 * (_sgn_sq(y) - _sgn_sq(z))
    return max(0.0, e1, e2, e3) / scale


def fact_projection_mean(v, rng):
    """``E_u (v^T u)^2 = |v|^2 / d``, evaluated exactly on the uniform
    distribution over a random orthonormal basis (an exact 2-design for
    this quadratic form)."""
    d = v.size
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    mean = float(np.mean((q.T @ v) ** 2))
    return _rel(mean, float(v @ v) / d)


def fact_projection_tail(d, delta):
    """``Pr[sqrt(d) |v^T u| <= delta |v|] <= 3 delta`` for uniform ``u`` on
    the sphere, using the exact law ``(u_1)^2 ~ Beta(1/2, (d-1)/2)``."""
    if d == 1:
        prob = 0.0 if delta < 1 else 1.0
    else:
        prob = float(betainc(0.5, (d - 1) / 2.0, min(1.0, delta * delta / d)))
    return max(0.0, prob - 3 * delta)


def fact_anti_markov(samples, K):
    """On the empirical law of ``samples`` (all in ``[0, K]``),
    ``Pr[Y >= E Y / 2] >= E Y / (2K)``; returns the violation."""
    y = np.asarray(samples, dtype=np.float64)
    delta = float(y.mean())
    if delta <= 0:
        return 0.0
    prob = float(np.mean(y >= delta / 2))
    return max(0.0, delta / (2 * K) - prob)


def run_facts(instances=1000, seed=0, n_max=64, d_max=8):
    """All identities on ``instances`` random (graph, embedding) draws."""
    rng = np.random.default_rng(seed)
    worst = {k: 0.0 for k in ("mean", "star", "subset", "identity", "r_i", "triangle",
                              "exp", "scalar", "projection_mean", "projection_tail",
                              "anti_markov")}
    for _ in range(instances):
        g = random_graph(rng, n_max)
        emb = random_embedding(rng, g, d_max)
        s = random_subset(rng, g.n)
        d = emb.d
        worst["mean"] = max(worst["mean"], fact_mean(g, emb))
        worst["star"] = max(worst["star"], fact_star(g, s))
        worst["subset"] = max(worst["subset"], fact_subset(g, emb, s))
        worst["identity"] = max(worst["identity"], fact_identity(g))
        worst["r_i"] = max(worst["r_i"], fact_r_i(g, emb, int(rng.integers(g.n))))
        v, u, t = rng.standard_normal((3, d)) * rng.uniform(0.1, 10)
        worst["triangle"] = max(worst["triangle"], fact_triangle(v, u, t))
        worst["exp"] = max(worst["exp"], fact_exp(g, rng))
        y, z = rng.standard_normal(2) * rng.uniform(0.1, 10)
        worst["scalar"] = max(worst["scalar"], fact_scalar(y, z))
        worst["projection_mean"] = max(worst["projection_mean"], fact_projection_mean(v, rng))
        worst["projection_tail"] = max(worst["projection_tail"],
                                       fact_projection_tail(d, float(rng.uniform(0, 1))))
        K = float(rng.uniform(1, 10))
        worst["anti_markov"] = max(worst["anti_markov"],
                                   fact_anti_markov(rng.uniform(0, K, size=int(rng.integers(1, 50))) * (rng.random() < 0.9), K))
    return worst


# --------------------------------------------------------------------------
# end-to-end kernels


def expv_vs_dense(instances=200, seed=0, n_max=200):
    """Worst relative error of :func:`expv` against ``eigh`` on random PSD matrices."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, n_max + 1))
        r = int(rng.integers(1, n + 1))
        B = rng.standard_normal((n, r))
        A = B @ B.T * (rng.uniform(0.01, 30.0) / r)
        u = rng.standard_normal(n)
        ref = dense_expm(-A) @ u
        got = expv(A, u)
        worst = max(worst, float(np.linalg.norm(got - ref) / np.linalg.norm(ref)))
    return worst


def sketch_fidelity(g, acc, epsilon, cfg, rng, samples):
    """Compare sketched and exact ``L . X``, ``L(K_V) . X`` and ``R_i . X``.

    Returns ``(passed, total)`` over ``samples`` comparisons, each counted
    as passing when within a factor ``1 +- 1/64`` plus ``1e-6``.
    """
    X = dense_u_epsilon(g, acc, epsilon)
    L = dense_laplacian(g)
    Lk = dense_lks(g)
    exact_lx = float(np.sum(L * X))
    exact_kx = float(np.sum(Lk * X))
    exact_r = np.diag(X) - 2 * X @ g.mu + g.mu @ X @ g.mu  # R_i . X for all i
    ok = total = 0
    while total < samples:
        # U_eps already has unit mu-variance, so the normalised sketch compares directly
        emb = sketch_embedding(g, acc, cfg, rng)
        G = emb.gram()
        vals = [(float(np.sum(L * G)), exact_lx), (float(np.sum(Lk * G)), exact_kx)]
        vals += list(zip(emb.radii ** 2, exact_r))
        for got, ref in vals:
            ok += abs(got - ref) <= abs(ref) / 64.0 + 1e-6
            total += 1
    return ok, total


def jl_distortion(instances=20, seed=0, n=64):
    """Fraction of sketched quantities within ``1 +- 1/64`` of the exact ones
    on random graphs with random accumulated updates."""
    rng = np.random.default_rng(seed)
    ok = total = 0
    cfg = SketchConfig(method="krylov")
    for _ in range(instances):
        g = random_graph(rng, n)
        t = int(rng.integers(1, 2000))
        acc = UpdateAccumulator(g, t / (6.0 * g.total_volume),
                                rng.uniform(0, 0.01, g.n) * (rng.random(g.n) < 0.2),
                                float(rng.uniform(0, 1)), t)
        a, b = sketch_fidelity(g, acc, cfg.epsilon, cfg, rng, 100)
        ok += a
        total += b
    return ok / total


def random_regret_sequence(rng, n, T):
    """Admissible MMW inputs: symmetric, ``0 <= Y <= I``, ``Y vhat = 0``."""
    d = rng.uniform(1, 5, size=n)
    vhat = np.sqrt(d) / math.sqrt(d.sum())
    P = np.eye(n) - np.outer(vhat, vhat)
    Ys = []
    for _ in range(T):
        r = int(rng.integers(1, n))
        B = P @ rng.standard_normal((n, r))
        Y = B @ B.T
        Y /= np.linalg.eigvalsh(Y)[-1] * rng.uniform(1.0, 3.0)
        Ys.append(0.5 * (Y + Y.T))
    return Ys, d
