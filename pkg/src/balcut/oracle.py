"""Separation oracle: decide whether a sketched embedding is roundable, or
emit dual coefficients together with a small low-conductance radial cut."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, PreconditionViolated, SweepCutMissing
from .operators import DualCoefficients
from .sdp import edge_energy

SPREAD_THRESHOLD = 1.0 / 64.0
MARKOV_TOL = 1e-9


@dataclass
class Roundable:
    diagnostics: dict = field(default_factory=dict)
    case_id: int = 2


@dataclass
class OracleCertificate:
    dual: DualCoefficients
    cut: np.ndarray
    case_id: int
    diagnostics: dict = field(default_factory=dict)


@dataclass
class SweepTable:
    """Prefix cuts ``S_1 .. S_{z-1}`` of a descending sort.

    ``order`` is the full vertex order; ``conductance[i]`` and ``mu[i]``
    describe the prefix of size ``i + 1``. ``z`` is the 1-based index of the
    first prefix whose mu reaches ``b / 8``.
    """

    order: np.ndarray
    conductance: np.ndarray
    mu: np.ndarray
    z: int


def descending_order(values):
    """Indices sorting ``values`` descending, ties by vertex index."""
    values = np.asarray(values)
    return np.lexsort((np.arange(values.size), -values))


def prefix_cuts(g, order):
    """Cut weight and volume of every prefix ``order[:i]``, ``i = 1..n``.

    Each edge is cut exactly by the prefixes that contain one endpoint, a
    contiguous range of prefix lengths, so a difference array gives all
    cut weights in O(m + n).
    """
    pos = np.empty(g.n, dtype=np.int64)
    pos[order] = np.arange(g.n)
    pu, pv = pos[g.tails], pos[g.heads]
    lo, hi = np.minimum(pu, pv), np.maximum(pu, pv)
    diff = (np.bincount(lo, g.weights, minlength=g.n)
            - np.bincount(hi, g.weights, minlength=g.n))
    cut = np.cumsum(diff)
    vol = np.cumsum(g.degrees[order])
    return cut, vol


def prefix_conductance(g, cut, vol):
    small = np.minimum(vol, g.total_volume - vol)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(small > 0, cut / np.where(small > 0, small, 1.0), np.inf)


def radial_sweep(g, radii, b):
    """Sweep cuts of ``radii`` (descending) truncated before mu reaches ``b/8``."""
    radii = np.asarray(radii, dtype=np.float64)
    if np.any(radii < 0):
        raise PreconditionViolated("radii must be non-negative")
    order = descending_order(radii)
    cut, vol = prefix_cuts(g, order)
    mus = vol / g.total_volume
    z = int(np.argmax(mus >= b / 8.0 - 1e-15)) + 1
    phi = prefix_conductance(g, cut, vol)
    return SweepTable(order, phi[: z - 1], mus[: z - 1], z)


def cheeger_sweep_bound(g, x, k, sigma):
    """Sweep cut of ``x`` with at least ``k`` vertices and small conductance.

    ``k`` is a prefix size in the descending order of ``x``. Preconditions:
    ``x >= 0``, ``mu(supp x) <= 1/2``, ``sum d x^2 <= 1``, ``1 <= k < |supp x|+1``
    and ``sum_{i >= k} d_i x_i^2 >= sigma`` over sorted positions. The
    returned cut ``S_h`` has ``k <= h <= |supp x|`` and conductance at most
    ``sqrt(2 x^T L x) / sigma``.

    Returns
    -------
    (mask, conductance, h)
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise PreconditionViolated("x must be a vector over the vertices")
    if np.any(x < 0):
        raise PreconditionViolated("x must be non-negative")
    supp = x > 0
    if g.mu[supp].sum() > 0.5 + 1e-12:
        raise PreconditionViolated("mu(supp(x)) exceeds 1/2")
    d = g.degrees
    if d @ x ** 2 > 1 + 1e-12:
        raise PreconditionViolated("sum d_i x_i^2 exceeds 1")
    if not sigma > 0:
        raise PreconditionViolated("sigma must be positive")
    order = descending_order(x)
    zm1 = int(supp.sum())
    if not 1 <= k <= zm1:
        raise PreconditionViolated(f"k must lie in [1, {zm1}]")
    tail = d[order[k - 1:]] @ x[order[k - 1:]] ** 2
    if tail < sigma - 1e-15:
        raise PreconditionViolated("tail mass sum_{i>=k} d_i x_i^2 is below sigma")
    cut, vol = prefix_cuts(g, order)
    phi = prefix_conductance(g, cut, vol)
    window = phi[k - 1:zm1]
    h = k + int(np.argmin(window))
    mask = np.zeros(g.n, dtype=bool)
    mask[order[:h]] = True
    return mask, float(window[h - k]), h


def run_oracle(emb, g, b, gamma, sweep_constant=2048.0):
    """Classify ``emb`` (assumed to have unit mu-variance).

    * case 1: half the edge energy is at least ``2 gamma``; emits
      ``alpha = gamma, beta = 0`` and an empty cut.
    * case 2: the mass inside radius ``32 (1-b)/b`` is spread, with
      ``E_{mu_R x mu_R} |v_i - v_j|^2 >= 1/64``; the embedding is roundable.
    * case 3: otherwise, the most balanced radial sweep cut ``B`` with
      ``mu(B) < b/8`` and conductance ``<= sweep_constant * sqrt(gamma)``
      yields ``alpha = 7 gamma / 8`` and ``beta_i = gamma mu_i`` on ``B``.
    """
    n = g.n
    energy = edge_energy(emb, g)
    diag = {"edge_energy": energy, "variance": emb.variance}
    if 0.5 * energy >= 2 * gamma:
        return OracleCertificate(DualCoefficients.zero_beta(gamma, n),
                                 np.zeros(n, dtype=bool), 1, diag)

    r2 = emb.radii ** 2
    in_r = r2 <= 32.0 * (1 - b) / b
    mu_out = float(g.mu[~in_r].sum())
    diag["mu_outside_R"] = mu_out
    if mu_out > b / (32.0 * (1 - b)) + MARKOV_TOL:
        raise ContractViolation(
            f"Markov bound failed: mu(outside R) = {mu_out:.3g} > {b / (32 * (1 - b)):.3g}")

    mu_r = g.mu[in_r]
    spread = 0.0
    if mu_r.sum() > 0:
        w = mu_r / mu_r.sum()
        vr = emb.vectors[in_r]
        centred = vr - w @ vr
        spread = 2.0 * float(w @ np.sum(centred * centred, axis=1))
    diag["spread_R"] = spread
    if spread >= SPREAD_THRESHOLD:
        return Roundable(diag)

    table = radial_sweep(g, emb.radii, b)
    limit = sweep_constant * math.sqrt(gamma)
    ok = np.flatnonzero(table.conductance <= limit)
    diag["z"] = table.z
    if ok.size == 0:
        raise SweepCutMissing(
            f"no radial sweep cut among the first {table.z - 1} prefixes has "
            f"conductance <= {limit:.3g}")
    # mu of prefixes is strictly increasing, so the last qualifying one is the most balanced
    h = int(ok[-1])
    cut = np.zeros(n, dtype=bool)
    cut[table.order[: h + 1]] = True
    beta = np.where(cut, gamma * g.mu, 0.0)
    diag["cut_size"] = h + 1
    diag["cut_mu"] = float(table.mu[h])
    diag["cut_conductance"] = float(table.conductance[h])
    return OracleCertificate(DualCoefficients(7.0 * gamma / 8.0, beta), cut, 3, diag)


def outcome_to_json(outcome, b):
    from .sdp import dual_value

    out = {"case_id": outcome.case_id, "diagnostics": _jsonable(outcome.diagnostics)}
    if isinstance(outcome, OracleCertificate):
        out["dual"] = outcome.dual.to_json()
        out["dual"]["value"] = dual_value(outcome.dual, b)
        out["cut"] = np.flatnonzero(outcome.cut).tolist()
    return out


def _jsonable(d):
    return {k: (v.item() if hasattr(v, "item") else v) for k, v in d.items()}
