"""Dense drivers shared by the oracle tests and the acceptance suite."""

import math

import numpy as np

from balcut.expsketch import dense_u_epsilon
from balcut.operators import UpdateAccumulator, accumulate
from balcut.oracle import OracleCertificate, descending_order, run_oracle
from balcut.reference import gram_embedding
from balcut.sdp import edge_energy

EPSILON = 1.0 / 130.0


def case1_state(g, t):
    """Accumulator after ``t`` edge-energy steps: only the ``L`` coefficient moves."""
    return UpdateAccumulator(g, t / (6.0 * g.total_volume), np.zeros(g.n), 0.0, t)


def exact_energy(g, acc):
    return edge_energy(gram_embedding(g, dense_u_epsilon(g, acc, EPSILON)), g)


def first_non_edge_step(g, gamma, t_max=10**7):
    """Smallest ``t`` whose exact iterate is not in the edge-energy case, or
    ``None`` when even ``t_max`` steps keep it there."""
    if exact_energy(g, case1_state(g, t_max)) / 2 >= 2 * gamma:
        return None
    lo, hi = 0, t_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if exact_energy(g, case1_state(g, mid)) / 2 >= 2 * gamma:
            lo = mid
        else:
            hi = mid
    return hi


def exact_oracle_run(g, b, gamma, steps, start=0):
    """Feed the oracle the exact iterate for up to ``steps`` iterations.

    Yields ``(X, outcome)`` for every oracle answer, folding certificates
    into the accumulator as the driver does; stops after a roundable answer.
    """
    acc = case1_state(g, start)
    for _ in range(steps):
        X = dense_u_epsilon(g, acc, EPSILON)
        out = run_oracle(gram_embedding(g, X), g, b, gamma)
        yield X, out
        if not isinstance(out, OracleCertificate):
            return
        acc = accumulate(acc, out.dual, gamma)


def normalized_extremes(g, M):
    """Extreme eigenvalues of ``2m D^{-1/2} M D^{-1/2}``, i.e. of ``M``
    relative to ``L(K_V)`` (the null direction contributes a zero)."""
    s = g.sqrt_degrees
    N = g.total_volume * M / s[:, None] / s[None, :]
    lam = np.linalg.eigvalsh(0.5 * (N + N.T))
    return float(lam[0]), float(lam[-1])


def cheeger_input(g, rng):
    """A random ``(x, k, sigma)`` meeting every precondition of the sweep
    bound, or ``None`` when a single vertex carries more than half of mu."""
    order = rng.permutation(g.n)
    supp = []
    for i in order:
        if g.mu[supp + [i]].sum() > 0.5:
            break
        supp.append(i)
    if not supp:
        return None
    x = np.zeros(g.n)
    x[supp] = rng.uniform(0.1, 1.0, len(supp))
    x /= math.sqrt(g.degrees @ x ** 2) * rng.uniform(1.0, 2.0)
    srt = np.sort(x[supp])[::-1]
    k = int(rng.integers(1, len(supp) + 1))
    ds = g.degrees[descending_order(x)][: len(supp)]
    tail = float(ds[k - 1:] @ srt[k - 1:] ** 2)
    return x, k, tail * rng.uniform(0.2, 1.0)
