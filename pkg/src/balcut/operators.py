"""Implicit operators of the form ``a L + sum_i b_i R_i + c L(K_V)``.

Nothing here forms a dense ``n x n`` matrix; every matvec is O(m + n) and
accepts either a vector or an ``n x k`` block.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NegativeBeta
from .graph import laplacian_apply


@dataclass(frozen=True)
class DualCoefficients:
    """Dual pair ``(alpha, beta)`` with ``beta >= 0`` stored densely."""

    alpha: float
    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        if np.any(beta < 0):
            raise NegativeBeta("beta must be entrywise non-negative")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def zero_beta(cls, alpha, n):
        return cls(float(alpha), np.zeros(n))

    def to_json(self):
        nz = np.flatnonzero(self.beta)
        return {
            "alpha": float(self.alpha),
            "beta": [{"vertex": int(i), "value": float(self.beta[i])} for i in nz],
        }

    @classmethod
    def from_json(cls, data, n):
        beta = np.zeros(n)
        for item in data["beta"]:
            beta[int(item["vertex"])] = float(item["value"])
        return cls(float(data["alpha"]), beta)


def _combo_apply(g, a, b, c, x):
    """``(a L + sum_i b_i R_i + c L(K_V)) x`` for a vector or block ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.n:
        raise InvalidParams(f"vector has {x.shape[0]} rows, graph has {g.n} vertices")
    mu = g.mu
    mean = mu @ x
    centred = x - mean if x.ndim == 1 else x - mean[None, :]
    out = a * laplacian_apply(g, x) if a else np.zeros_like(x)
    if x.ndim == 1:
        if b is not None:
            bc = b * centred
            out += bc - mu * bc.sum()
        if c:
            out += c * mu * centred
    else:
        if b is not None:
            bc = b[:, None] * centred
            out += bc - np.outer(mu, bc.sum(axis=0))
        if c:
            out += c * mu[:, None] * centred
    return out


class CertificateOperator:
    """``M(alpha, beta) = L / 2m + sum_i beta_i R_i - alpha L(K_V)``."""

    def __init__(self, g, dual):
        self.g = g
        self.dual = dual

    @property
    def alpha(self):
        return self.dual.alpha

    @property
    def beta(self):
        return self.dual.beta

    def matvec(self, x):
        g = self.g
        return _combo_apply(g, 1.0 / g.total_volume, self.dual.beta, -self.dual.alpha, x)

    def normalized_matvec(self, y):
        """``2m D^{-1/2} M D^{-1/2} y``, the form compared against the identity on the
        complement of ``D^{1/2} 1``."""
        s = self.g.sqrt_degrees
        y = np.asarray(y, dtype=np.float64)
        if y.ndim == 1:
            return self.g.total_volume * self.matvec(y / s) / s
        return self.g.total_volume * self.matvec(y / s[:, None]) / s[:, None]


@dataclass(frozen=True)
class UpdateAccumulator:
    """Running sum ``H = a L + sum_i b_i R_i + c L(K_V)`` of the MMW updates.

    Each update adds ``(M(alpha, beta) + gamma L(K_V)) / 6``, which is PSD for
    duals produced by the separation oracle.
    """

    g: object
    a: float
    b: np.ndarray
    c: float
    t: int = 0

    @classmethod
    def zero(cls, g):
        return cls(g, 0.0, np.zeros(g.n), 0.0, 0)

    def matvec(self, x):
        b = self.b if np.any(self.b) else None
        return _combo_apply(self.g, self.a, b, self.c, x)


def normalized_rows_matvec(acc, X, epsilon):
    """:func:`normalized_operator_matvec` applied to the rows of ``X`` (``k x n``).

    Fuses the rank-one parts so a block costs one sparse product and a few
    passes over ``X``; used by the Krylov kernel, which stores vectors as rows.
    """
    g = acc.g
    s = g.sqrt_degrees
    mu = g.mu
    x = X / s
    mean = x @ mu
    coef = acc.b + acc.c * mu
    t = x @ acc.b - mean * acc.b.sum()
    out = coef * x
    if acc.a:
        lx = g.laplacian @ np.ascontiguousarray(x.T)
        out += acc.a * lx.T
    out -= np.stack([mean, t], axis=1) @ np.stack([coef, mu])
    out *= (g.total_volume * epsilon) / s
    return out


def accumulate(acc, dual, gamma):
    """Return ``acc`` plus ``(M(alpha, beta) + gamma L(K_V)) / 6``."""
    if np.any(dual.beta < 0):
        raise NegativeBeta("beta must be entrywise non-negative")
    g = acc.g
    return UpdateAccumulator(
        g,
        acc.a + 1.0 / (6.0 * g.total_volume),
        acc.b + dual.beta / 6.0,
        acc.c + (gamma - dual.alpha) / 6.0,
        acc.t + 1,
    )


def operator_matvec(op, x):
    """Matvec for either an accumulator or a certificate operator."""
    return op.matvec(x)


def normalized_operator_matvec(acc, y, epsilon):
    """``(2m eps) D^{-1/2} H D^{-1/2} y``; annihilates ``D^{1/2} 1``."""
    g = acc.g
    s = g.sqrt_degrees
    y = np.asarray(y, dtype=np.float64)
    scale = g.total_volume * epsilon
    if y.ndim == 1:
        return scale * acc.matvec(y / s) / s
    return scale * acc.matvec(y / s[:, None]) / s[:, None]
