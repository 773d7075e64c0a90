"""Random-projection sweep rounding of roundable embeddings."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NoQualifyingSweep
from .oracle import prefix_conductance, descending_order, prefix_cuts


def balance_constant(b):
    """Balance floor ``c = rho / 32`` from the projection argument.

    ``sigma = 4 sqrt(2) sqrt((1-b)/b)`` and ``rho = 1 / (1536 sigma^2)``.
    """
    if not 0 < b <= 0.5:
        raise InvalidParams("b must lie in (0, 1/2]")
    sigma_sq = 32.0 * (1 - b) / b
    rho = 1.0 / (1536.0 * sigma_sq)
    return rho / 32.0


@dataclass
class RoundingConfig:
    """``trials`` defaults to ``ceil(4 log2 n)``; ``c_balance`` to ``b / 4``
    (or :func:`balance_constant` with ``paper_constants``)."""

    trials: int = None
    c_balance: float = None
    rng_seed: int = 0
    paper_constants: bool = False

    def resolve(self, n, b):
        trials = self.trials if self.trials is not None else math.ceil(4 * math.log2(max(n, 2)))
        if trials < 1:
            raise InvalidParams("trials must be at least 1")
        if self.c_balance is not None:
            c = self.c_balance
        elif self.paper_constants:
            c = balance_constant(b)
        else:
            c = b / 4.0
        if not 0 < c <= b:
            raise InvalidParams("c_balance must lie in (0, b]")
        return trials, c


@dataclass
class RoundedCut:
    cut: np.ndarray
    conductance: float
    balance: float
    trial: int


def _best_window_cut(g, x, c):
    order = descending_order(x)
    cut, vol = prefix_cuts(g, order)
    lo, hi = c * g.total_volume, (1 - c) * g.total_volume
    ok = (vol >= lo - 1e-12) & (vol <= hi + 1e-12)
    if not ok.any():
        return None
    phi = np.where(ok, prefix_conductance(g, cut, vol), np.inf)
    i = int(np.argmin(phi))
    return order[: i + 1], float(phi[i])


def proj_round(emb, g, b, cfg=None, rng=None):
    """Round a roundable embedding to a balanced low-conductance cut.

    Each trial projects onto a uniform random direction ``u`` in ``S^{d-1}``
    (``x_i = sqrt(d) u . v_i``), sorts descending and keeps the sweep cut of
    least conductance whose volume lies in ``[c 2m, (1-c) 2m]``. The best
    cut over all trials is returned; ties go to the lexicographically
    smallest vertex list.

    Raises
    ------
    NoQualifyingSweep
        If no trial produced a sweep cut inside the volume window.
    """
    cfg = cfg or RoundingConfig()
    if rng is None:
        rng = np.random.Generator(np.random.Philox(cfg.rng_seed))
    trials, c = cfg.resolve(g.n, b)
    d = emb.d
    best = None
    for t in range(trials):
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        x = math.sqrt(d) * (emb.vectors @ u)
        found = _best_window_cut(g, x, c)
        if found is None:
            continue
        members, phi = found
        key = (phi, tuple(np.sort(members)))
        if best is None or key < best[0]:
            best = (key, members, t)
    if best is None:
        raise NoQualifyingSweep(
            f"no sweep cut with volume in [{c:.3g}, {1 - c:.3g}] of the total in {trials} trials")
    (phi, _), members, t = best
    mask = np.zeros(g.n, dtype=bool)
    mask[members] = True
    mu_s = float(g.mu[mask].sum())
    return RoundedCut(mask, phi, min(mu_s, 1 - mu_s), t)
