"""Compiled Lanczos kernels for the sketch of the MMW iterate.

The operator is the half-scaled normalised accumulator
``A = (2m eps / 2) D^{-1/2} (a L + sum_i b_i R_i + c L(K_V)) D^{-1/2}``.
Blocks are ``n x w`` with one Lanczos recurrence per column, so a vertex
row of a block is one contiguous run of ``w`` doubles and every neighbour
gather reads whole cache lines.

The recurrence runs twice: once to build the tridiagonal matrix and once
more, replaying the recorded coefficients, to accumulate the result. Only
three blocks are live at any time, so the working set does not grow with
the number of steps.
"""

import math

import numpy as np
from numba import njit

from .errors import BreakdownNotConverged


@njit(cache=True, nogil=True)
def _apply(indptr, indices, weights, deg, inv_s, coef, mu, a, scale, q, t, mean, v):
    """``v = A q`` for a compact ``n x w`` block ``q``. Returns the column
    dot products ``q . v`` and the squared column norms of ``v``."""
    n, w = q.shape
    dots = np.zeros(w)
    norm2 = np.zeros(w)
    row = np.empty(w)
    for i in range(n):
        si = inv_s[i]
        di = deg[i] * si
        for k in range(w):
            row[k] = di * q[i, k]
        for p in range(indptr[i], indptr[i + 1]):
            u = indices[p]
            f = weights[p] * inv_s[u]
            for k in range(w):
                row[k] -= f * q[u, k]
        for k in range(w):
            x = q[i, k] * si
            val = scale * si * (a * row[k] + coef[i] * (x - mean[k]) - t[k] * mu[i])
            v[i, k] = val
            dots[k] += q[i, k] * val
            norm2[k] += val * val
    return dots, norm2


@njit(cache=True, nogil=True)
def _recur(v, q, qp, alpha, beta, vhat, shift):
    """``v -= alpha q + beta qp - shift vhat``; returns the squared column norms.

    ``shift`` is ``alpha (vhat . q) + beta (vhat . qp)``, so ``q`` and ``qp``
    enter projected onto the complement of the null vector ``vhat``.
    """
    n, w = v.shape
    norm2 = np.zeros(w)
    for i in range(n):
        for k in range(w):
            x = v[i, k] - alpha[k] * q[i, k] - beta[k] * qp[i, k] + shift[k] * vhat[i]
            v[i, k] = x
            norm2[k] += x * x
    return norm2


@njit(cache=True, nogil=True)
def _dots(v, q, qp):
    """Column dot products of ``v`` with ``q`` and with ``qp``."""
    n, w = v.shape
    d1 = np.zeros(w)
    d2 = np.zeros(w)
    for i in range(n):
        for k in range(w):
            d1[k] += q[i, k] * v[i, k]
            d2[k] += qp[i, k] * v[i, k]
    return d1, d2


@njit(cache=True, nogil=True)
def _store(v, beta, q, inv_s, mu, b, out, c, accumulate):
    """``q = v / beta`` (zero where broken down), optionally ``out += c q``.
    Returns the column sums ``sum_i mu_i x_i`` and ``sum_i b_i x_i`` with
    ``x = D^{-1/2} q``."""
    n, w = v.shape
    m1 = np.zeros(w)
    m2 = np.zeros(w)
    for i in range(n):
        f1 = mu[i] * inv_s[i]
        f2 = b[i] * inv_s[i]
        for k in range(w):
            x = v[i, k] / beta[k] if beta[k] > 0 else 0.0
            q[i, k] = x
            m1[k] += f1 * x
            m2[k] += f2 * x
            if accumulate:
                out[i, k] += c[k] * x
    return m1, m2


def accumulator_expm(acc, epsilon, U, eta, max_dim, check_every=3, relative=False):
    """``exp(-A) U`` for the half-scaled normalised accumulator, column by column.

    With ``relative`` the result is returned as ``(exp(theta) exp(-A) U, theta)``
    for a common ``theta`` near the bottom of the spectrum, so callers that
    only need the result up to scale are safe from underflow.

    Same stopping rule and output as the generic Krylov kernel in
    :mod:`balcut.expsketch`; ``U`` is ``n x w``. Orthogonality is kept
    locally: where the three-term step cancels all but a ``1e-6`` fraction
    of ``|A q_j|^2``, rounding in the new direction is no longer negligible
    and it is projected against ``q_j`` and ``q_{j-1}`` once more.
    """
    from .expsketch import _ritz_coefficients

    g = acc.g
    U = np.ascontiguousarray(U, dtype=np.float64)
    n, w = U.shape
    norms = np.sqrt(np.einsum("nk,nk->k", U, U))
    live = norms > 0
    if not live.any():
        return (np.zeros_like(U), 0.0) if relative else np.zeros_like(U)
    adj = g.adjacency
    inv_s = 1.0 / g.sqrt_degrees
    mu = np.ascontiguousarray(g.mu)
    b = np.ascontiguousarray(acc.b, dtype=np.float64)
    args = (adj.indptr, adj.indices, adj.data, g.degrees, inv_s, b + acc.c * mu, mu,
            float(acc.a), 0.5 * g.total_volume * epsilon)
    bsum = float(b.sum())
    root = math.sqrt(g.total_volume)
    vhat = g.sqrt_degrees / root
    max_dim = max(1, min(max_dim, n + 1))
    tiny = 1e-14
    start = U / np.where(live, norms, 1.0)
    none = np.empty((0, w))

    # first pass: build the tridiagonal matrix, keeping only q_j and q_{j-1}
    q, qp, v = np.empty((n, w)), np.zeros((n, w)), np.empty((n, w))
    m1, m2 = _store(start, np.ones(w), q, inv_s, mu, b, none, norms, False)
    alphas, betas, fixes = [], [], []
    beta_prev = np.zeros(w)
    c, cp = m1 * root, np.zeros(w)  # vhat . q_j and vhat . q_{j-1}
    found = None
    for j in range(max_dim):
        a, before = _apply(*args, q, m2 - m1 * bsum, m1, v)
        nrm = _recur(v, q, qp, a, beta_prev, vhat, a * c + beta_prev * cp)
        fix = None
        if np.any(nrm < 1e-6 * before):
            fix = _dots(v, q, qp)
            nrm = _recur(v, q, qp, fix[0], fix[1], vhat, fix[0] * c + fix[1] * cp)
            a = a + fix[0]
        beta = np.sqrt(nrm)
        beta = np.where(beta <= tiny * (np.abs(a) + beta_prev + 1.0), 0.0, beta)
        alphas.append(a)
        betas.append(beta)
        fixes.append(fix)
        size = j + 1
        last = size == max_dim or bool(np.all((beta == 0) | ~live))
        if size % check_every == 0 or last:
            coeff, theta_min = _ritz_coefficients(alphas, betas)
            if np.all((beta * np.abs(coeff[:, -1]) <= eta) | ~live):
                found = size
                break
        beta_prev = beta
        qp, q = q, qp
        m1, m2 = _store(v, beta, q, inv_s, mu, b, none, norms, False)
        c, cp = m1 * root, c
    if found is None:
        raise BreakdownNotConverged(
            f"Krylov exponential did not reach eta={eta:g} within {max_dim} steps"
        )

    # second pass: the same recurrence with the recorded coefficients
    # reproduces every q_j bit for bit, and accumulates sum_j c_j q_j
    coeff = np.ascontiguousarray(coeff.T)
    out = np.zeros((n, w))
    q, qp = np.empty((n, w)), np.zeros((n, w))
    m1, m2 = _store(start, np.ones(w), q, inv_s, mu, b, out, coeff[0], True)
    beta_prev = np.zeros(w)
    c, cp = m1 * root, np.zeros(w)
    for j in range(found - 1):
        dots, _ = _apply(*args, q, m2 - m1 * bsum, m1, v)
        _recur(v, q, qp, dots, beta_prev, vhat, dots * c + beta_prev * cp)
        if fixes[j] is not None:
            f0, f1 = fixes[j]
            _recur(v, q, qp, f0, f1, vhat, f0 * c + f1 * cp)
        beta_prev = betas[j]
        qp, q = q, qp
        m1, m2 = _store(v, beta_prev, q, inv_s, mu, b, out, coeff[j + 1], True)
        c, cp = m1 * root, c
    if relative:
        theta = float(theta_min[live].min())
        out *= np.where(live, norms * np.exp(-np.where(live, theta_min - theta, 0.0)), 0.0)
        return out, theta
    out *= norms * np.exp(-theta_min)
    return out


def warm_up():
    """Compile every kernel on a toy problem (results are cached on disk)."""
    from .operators import UpdateAccumulator
    from .reference import cycle_graph

    g = cycle_graph(4)
    acc = UpdateAccumulator(g, 0.1, np.full(4, 0.01), 0.1, 1)
    accumulator_expm(acc, 0.01, np.eye(4)[:, :2], 1e-12, 8)
