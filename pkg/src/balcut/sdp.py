"""The balanced-separator SDP: primal constraints on embeddings, the dual
value, dual feasibility checks and the cut-to-embedding relaxation map."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import EmptyOrFullCut
from .expsketch import DENSE_LIMIT, Embedding, complement_basis
from .graph import as_mask
from .operators import CertificateOperator, DualCoefficients

__all__ = [
    "DualCoefficients",
    "PsdpReport",
    "DualFeasibility",
    "evaluate_psdp",
    "edge_energy",
    "cut_to_embedding",
    "dual_value",
    "verify_dual_feasibility",
    "certificate_to_json",
]

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class PsdpReport:
    edge_energy: float
    variance: float
    max_radius_sq: float
    feasible: bool
    violated: tuple = ()


def edge_energy(emb, g):
    """``E_{{i,j} in E} |v_i - v_j|^2`` with edges drawn proportionally to weight.

    Computed as ``L . X / m`` through one sparse product.
    """
    V = emb.vectors
    return float(np.einsum("ij,ij->", V, g.laplacian @ V) / g.total_weight)


def evaluate_psdp(emb, g, b, gamma):
    """Evaluate the three primal constraints.

    Checks edge energy ``<= 4 gamma``, mu-variance ``== 1`` and every squared
    radius ``<= (1 - b) / b``, each with absolute slack ``1e-9``.
    """
    energy = edge_energy(emb, g)
    variance = emb.variance
    max_r2 = float(np.max(emb.radii ** 2))
    violated = []
    if energy > 4 * gamma + FEAS_TOL:
        violated.append("edge_energy")
    if abs(variance - 1.0) > FEAS_TOL:
        violated.append("variance")
    if max_r2 > (1 - b) / b + FEAS_TOL:
        violated.append("radius")
    return PsdpReport(energy, variance, max_r2, not violated, tuple(violated))


def cut_to_embedding(g, s):
    """One-dimensional unit-variance embedding of the cut ``s``.

    The smaller side (by mu) gets ``sqrt(mu(other)/mu(small))`` and the larger
    side ``-sqrt(mu(small)/mu(other))``, so the mu-mean is zero.
    """
    mask = as_mask(g, s)
    if not mask.any() or mask.all():
        raise EmptyOrFullCut("cut_to_embedding needs a proper non-empty cut")
    p = float(g.mu[mask].sum())
    if p > 0.5:
        mask, p = ~mask, 1.0 - p
    q = 1.0 - p
    x = np.where(mask, math.sqrt(q / p), -math.sqrt(p / q))
    return Embedding(x[:, None], g.mu)


def dual_value(dual, b):
    """``alpha - (1 - b) / b * sum(beta)``."""
    return float(dual.alpha - (1 - b) / b * dual.beta.sum())


@dataclass(frozen=True)
class DualFeasibility:
    feasible: bool
    value: float
    lambda_min: float
    violated: tuple = ()


def min_normalized_eigenvalue(op, dense=None):
    """Smallest eigenvalue of ``2m D^{-1/2} op D^{-1/2}`` on the complement of
    ``D^{1/2} 1``. Dense for small graphs, ARPACK Lanczos otherwise."""
    g = op.g
    vhat = g.sqrt_degrees / math.sqrt(g.total_volume)
    if dense is None:
        dense = g.n <= DENSE_LIMIT
    if dense:
        N = op.normalized_matvec(np.eye(g.n))
        N = 0.5 * (N + N.T)
        Q = complement_basis(vhat)
        return float(np.linalg.eigvalsh(Q.T @ N @ Q)[0])

    def proj(y):
        return y - vhat * (vhat @ y)

    def mv(y):
        y = proj(np.ravel(y))
        return proj(op.normalized_matvec(y))

    lin = LinearOperator((g.n, g.n), matvec=mv, dtype=np.float64)
    # push the excluded direction far up so it cannot be reported
    norm_est = abs(eigsh(lin, k=1, which="LM", return_eigenvectors=False, tol=1e-6)[0])
    shift = 10.0 * norm_est + 1.0
    lin2 = LinearOperator((g.n, g.n), matvec=lambda y: mv(y) + shift * vhat * (vhat @ np.ravel(y)),
                          dtype=np.float64)
    return float(eigsh(lin2, k=1, which="SA", return_eigenvectors=False, tol=1e-10)[0])


def verify_dual_feasibility(g, dual, b, gamma_prime, tol=1e-8):
    """Check ``(alpha, beta)`` against the dual program at level ``gamma_prime``.

    Requires ``V(alpha, beta) > 4 gamma_prime`` and the normalised
    ``M(alpha, beta)`` to have smallest eigenvalue ``>= -tol`` on the
    complement of ``D^{1/2} 1``.
    """
    value = dual_value(dual, b)
    lam = min_normalized_eigenvalue(CertificateOperator(g, dual))
    violated = []
    if not value > 4 * gamma_prime:
        violated.append("value")
    if lam < -tol:
        violated.append("psd")
    return DualFeasibility(not violated, value, lam, tuple(violated))


def certificate_to_json(dual, b, gamma_certified):
    out = dual.to_json()
    out["gamma_certified"] = float(gamma_certified)
    out["value"] = dual_value(dual, b)
    return out
