"""The main primal-dual loop, its interpretation helpers and a recursive
decomposition wrapper."""

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .errors import ContractViolation, InvalidParams, NotApplicable, PreconditionViolated, RecursionDepthExceeded
from .expsketch import SketchConfig, sketch_embedding
from .graph import Graph, conductance, is_b_balanced
from .operators import DualCoefficients, UpdateAccumulator, accumulate
from .oracle import OracleCertificate, run_oracle
from .reference import dense_expm
from .rounding import RoundingConfig, proj_round
from .sdp import dual_value, verify_dual_feasibility

SCHEMA_VERSION = 1
PAPER_EPSILON = 1.0 / 130.0
PAPER_T_CONSTANT = 6.0 * 129.0 * 130.0
DEFAULT_T_CONSTANT = 20.0


@dataclass
class RunConfig:
    """Parameters of a :func:`balcut` run.

    The iteration count is ``T = ceil(t_constant * ln n / gamma)``, capped
    by ``max_iterations`` when given. ``paper_constants`` switches epsilon,
    the sketch accuracy, ``t_constant`` and the rounding balance floor to
    the values used in the analysis.
    """

    b: float
    gamma: float
    epsilon: float = PAPER_EPSILON
    t_constant: float = DEFAULT_T_CONSTANT
    max_iterations: int = None
    paper_constants: bool = False
    rng_seed: int = 0
    sketch: SketchConfig = None
    rounding: RoundingConfig = None
    sweep_constant: float = 2048.0
    verify: bool = True
    extend_factor: float = 1.25

    def __post_init__(self):
        if not 0 < self.b <= 0.5:
            raise InvalidParams("b must lie in (0, 1/2]")
        if not 0 < self.gamma < 1:
            raise InvalidParams("gamma must lie in (0, 1)")
        if not 0 < self.epsilon < 1:
            raise InvalidParams("epsilon must lie in (0, 1)")
        if not self.t_constant > 0:
            raise InvalidParams("t_constant must be positive")
        if not self.extend_factor > 1:
            raise InvalidParams("extend_factor must exceed 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidParams("max_iterations must be at least 1")
        if self.paper_constants:
            self.epsilon = PAPER_EPSILON
            self.t_constant = PAPER_T_CONSTANT
        base = self.sketch or (SketchConfig.paper() if self.paper_constants else SketchConfig())
        self.sketch = replace(base, epsilon=self.epsilon, rng_seed=self.rng_seed)
        rounding = self.rounding or RoundingConfig()
        self.rounding = replace(rounding, rng_seed=self.rng_seed,
                                paper_constants=rounding.paper_constants or self.paper_constants)

    def iterations(self, n):
        T = max(1, math.ceil(self.t_constant * math.log(n) / self.gamma))
        if self.max_iterations is not None:
            T = min(T, self.max_iterations)
        return T

    def iteration_ceiling(self, n):
        """Largest ``T`` reachable by extending an unverified certificate."""
        T = max(self.iterations(n), math.ceil(PAPER_T_CONSTANT * math.log(n) / self.gamma))
        if self.max_iterations is not None:
            T = min(T, self.max_iterations)
        return T

    def to_json(self):
        return {
            "b": self.b,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "t_constant": self.t_constant,
            "max_iterations": self.max_iterations,
            "paper_constants": self.paper_constants,
            "seed": self.rng_seed,
            "sketch_delta": self.sketch.delta,
            "sketch_eta": self.sketch.eta,
            "trials": self.rounding.trials,
            "c_balance": self.rounding.c_balance,
            "verify": self.verify,
        }


@dataclass
class BalancedCut:
    cut: np.ndarray
    conductance: float
    balance: float
    via: str  # "rounded" or "union"
    iterations: int
    trace: list = field(default_factory=list)

    kind = "balanced_cut"


@dataclass
class Certificate:
    """Terminal dual certificate with the union ``S`` of the oracle cuts.

    ``conductance`` is ``None`` when ``S`` is empty (every iteration hit the
    edge-energy case).
    """

    cut: np.ndarray
    conductance: float
    dual: DualCoefficients
    gamma_certified: float
    iterations: int
    trace: list = field(default_factory=list)
    verified: bool = None
    lambda_min: float = None

    kind = "certificate"


def _set_conductance(g, mask):
    if not mask.any() or mask.all():
        return None
    return conductance(g, mask)


def balcut(g, cfg):
    """Run the primal-dual loop on ``g``.

    Each iteration sketches the current exponential iterate, asks the
    separation oracle about it and then

    * rounds it and returns a :class:`BalancedCut` when it is roundable,
    * returns the union of the oracle cuts so far when that union is
      ``b/4``-balanced,
    * otherwise folds the oracle's dual pair into the accumulator.

    After ``T`` iterations the averaged dual pair is returned as a
    :class:`Certificate` at level ``3 gamma / 16``. With ``cfg.verify`` the
    pair is checked first; if it is not feasible, ``T`` grows by
    ``cfg.extend_factor`` and the loop resumes, up to the iteration count
    of the analysis (or ``max_iterations``). The certificate records whether the check passed.

    Raises
    ------
    ContractViolation
        Any oracle or rounding failure, with ``trace`` attached.
    """
    if not isinstance(g, Graph):
        raise InvalidParams("balcut expects a Graph")
    b, gamma = cfg.b, cfg.gamma
    T = cfg.iterations(g.n)
    ceiling = cfg.iteration_ceiling(g.n)
    rng = np.random.Generator(np.random.Philox(cfg.rng_seed))
    acc = UpdateAccumulator.zero(g)
    alpha_sum, beta_sum = 0.0, np.zeros(g.n)
    union = np.zeros(g.n, dtype=bool)
    trace = []
    t = 0
    try:
        while True:
            while t < T:
                t += 1
                emb = sketch_embedding(g, acc, cfg.sketch, rng)
                out = run_oracle(emb, g, b, gamma, cfg.sweep_constant)
                rec = {"t": t, "case": out.case_id, **out.diagnostics}
                trace.append(rec)
                if not isinstance(out, OracleCertificate):
                    r = proj_round(emb, g, b, cfg.rounding, rng)
                    rec["rounded_conductance"] = r.conductance
                    return BalancedCut(r.cut, r.conductance, r.balance, "rounded", t, trace)
                union |= out.cut
                rec["union_mu"] = float(g.mu[union].sum())
                if is_b_balanced(g, union, b / 4.0):
                    mu_u = rec["union_mu"]
                    return BalancedCut(union.copy(), conductance(g, union), min(mu_u, 1 - mu_u),
                                       "union", t, trace)
                alpha_sum += out.dual.alpha
                beta_sum += out.dual.beta
                acc = accumulate(acc, out.dual, gamma)
            dual = DualCoefficients(alpha_sum / t, beta_sum / t)
            cert = Certificate(union.copy(), _set_conductance(g, union), dual, 3.0 * gamma / 16.0,
                               t, trace)
            if not cfg.verify:
                return cert
            check = verify_dual_feasibility(g, dual, b, cert.gamma_certified)
            cert.verified, cert.lambda_min = check.feasible, check.lambda_min
            trace.append({"t": t, "verify": check.feasible, "lambda_min": check.lambda_min})
            if check.feasible or t >= ceiling:
                return cert
            # the practical iteration count was too short; keep going
            T = min(max(T + 1, math.ceil(cfg.extend_factor * T)), ceiling)
    except ContractViolation as exc:
        exc.trace = trace
        raise


@dataclass(frozen=True)
class Interpretation:
    """No cut ``C`` with ``mu(C) <= 1/2`` and conductance at most
    ``conductance_threshold`` has ``mu(C)`` above ``balance_ceiling``."""

    balance_ceiling: float
    conductance_threshold: float
    certificate_mu: float


def certify_no_balanced_cut(outcome, g, b, gamma):
    """Read a certificate as a bound on all low-conductance cuts.

    Every cut ``C`` with ``vol(C) <= vol(G)/2`` and conductance at most
    ``gamma/16`` keeps half its volume inside ``S``, so
    ``mu(C) <= 2 mu(S)``.

    Raises
    ------
    NotApplicable
        For a balanced-cut outcome or a ``b/4``-balanced ``S``.
    """
    if not isinstance(outcome, Certificate):
        raise NotApplicable("a balanced cut was found; there is nothing to certify")
    mask = np.asarray(outcome.cut, dtype=bool)
    if mask.any() and is_b_balanced(g, mask, b / 4.0):
        raise NotApplicable("S is already b/4-balanced")
    mu_s = float(g.mu[mask].sum())
    return Interpretation(min(2.0 * mu_s, 0.5), gamma / 16.0, mu_s)


@dataclass(frozen=True)
class RegretReport:
    holds: bool
    slack: float


def mmw_regret_check(Ys, epsilon, degrees=None, tol=1e-8):
    """Check the matrix multiplicative weights regret bound densely.

    With ``Z_1 = I / (n-1)`` on the complement of ``vhat = D^{1/2} 1 / |.|``
    and ``Z_{t+1} = exp(-eps S_t) / tr(exp(-eps S_t))``, ``S_t = Y_1 + .. + Y_t``,
    verifies ``lambda_min(S_T) >= (1 - eps) sum_t Y_t . Z_t - ln n / eps``.

    Raises
    ------
    PreconditionViolated
        If some ``Y_t`` is not symmetric with spectrum in ``[0, 1]`` or does
        not annihilate ``vhat``.
    """
    Ys = [np.asarray(Y, dtype=np.float64) for Y in Ys]
    if not Ys:
        raise PreconditionViolated("empty sequence")
    n = Ys[0].shape[0]
    if n > 64:
        raise PreconditionViolated("dense regret check limited to n <= 64")
    d = np.ones(n) if degrees is None else np.asarray(degrees, dtype=np.float64)
    vhat = np.sqrt(d) / math.sqrt(d.sum())
    q, _ = np.linalg.qr(np.column_stack([vhat, np.eye(n)[:, : n - 1]]))
    Q = q[:, 1:]
    S = np.zeros((n - 1, n - 1))
    gain = 0.0
    for Y in Ys:
        if Y.shape != (n, n) or not np.allclose(Y, Y.T, atol=1e-12):
            raise PreconditionViolated("Y must be symmetric n x n")
        if np.linalg.norm(Y @ vhat) > 1e-9:
            raise PreconditionViolated("Y must annihilate vhat")
        Yc = Q.T @ Y @ Q
        lam = np.linalg.eigvalsh(Yc)
        if lam[0] < -1e-10 or lam[-1] > 1 + 1e-10:
            raise PreconditionViolated("Y must satisfy 0 <= Y <= I")
        E = dense_expm(-epsilon * S)
        Z = E / np.trace(E)
        gain += float(np.sum(Yc * Z))
        S += Yc
    lam_min = float(np.linalg.eigvalsh(S)[0])
    slack = lam_min - ((1 - epsilon) * gain - math.log(n) / epsilon)
    return RegretReport(slack >= -tol, slack)


@dataclass
class Leaf:
    """A piece of a decomposition, in original vertex labels."""

    vertices: np.ndarray
    depth: int
    certificate: Certificate = None


def decompose(g, gamma, cfg, max_depth=None, min_size=4):
    """Split ``g`` recursively along balanced cuts.

    Every component whose run ends in a certificate becomes a leaf, as does
    any component with fewer than ``min_size`` vertices. Boundary edges are
    dropped from the induced subgraphs.

    Raises
    ------
    RecursionDepthExceeded
        When a branch goes deeper than ``max_depth``; the default allows
        ``log(2m) / log(1 / (1 - c))`` levels where ``c`` is the weakest
        balance a returned cut can have.
    """
    run_cfg = replace(cfg, gamma=gamma, sketch=None, rounding=cfg.rounding)
    if max_depth is None:
        _, c = run_cfg.rounding.resolve(g.n, run_cfg.b)
        c = min(c, run_cfg.b / 4.0)
        max_depth = math.ceil(math.log(g.total_volume) / -math.log1p(-c)) + 1
    leaves = []
    stack = [(g, np.arange(g.n), 0)]
    while stack:
        h, labels, depth = stack.pop()
        if depth > max_depth:
            raise RecursionDepthExceeded(f"decomposition deeper than {max_depth}")
        if h.n < min_size:
            leaves.append(Leaf(labels, depth))
            continue
        out = balcut(h, run_cfg)
        if isinstance(out, Certificate):
            leaves.append(Leaf(labels, depth, out))
            continue
        for side in (out.cut, ~out.cut):
            for sub, idx in h.induced_subgraph(np.flatnonzero(side)):
                if sub is None:
                    leaves.append(Leaf(labels[idx], depth + 1))
                else:
                    stack.append((sub, labels[idx], depth + 1))
    leaves.sort(key=lambda leaf: int(leaf.vertices.min()))
    return leaves


def crossing_weight(g, leaves):
    """Total weight of edges whose endpoints lie in different leaves."""
    part = np.empty(g.n, dtype=np.int64)
    for i, leaf in enumerate(leaves):
        part[leaf.vertices] = i
    return float(g.weights[part[g.tails] != part[g.heads]].sum())


# --------------------------------------------------------------------------
# JSON


def outcome_to_json(outcome, cfg=None):
    """Versioned JSON-ready dict for a run outcome."""
    out = {
        "version": SCHEMA_VERSION,
        "build": f"balcut-{__version__}",
        "outcome": outcome.kind,
        "iterations": outcome.iterations,
        "cut": np.flatnonzero(outcome.cut).tolist(),
        "conductance": outcome.conductance,
    }
    if cfg is not None:
        out["config"] = cfg.to_json()
    if isinstance(outcome, BalancedCut):
        out["balance"] = outcome.balance
        out["via"] = outcome.via
    else:
        out["dual"] = outcome.dual.to_json()
        out["gamma_certified"] = outcome.gamma_certified
        out["verified"] = outcome.verified
        out["lambda_min"] = outcome.lambda_min
        if cfg is not None:
            out["dual_value"] = dual_value(outcome.dual, cfg.b)
    return out


def trace_to_jsonl(trace):
    return "".join(json.dumps(_plain(rec)) + "\n" for rec in trace)


def _plain(rec):
    return {k: (v.item() if hasattr(v, "item") else v) for k, v in rec.items()}


def decomposition_to_json(g, leaves):
    return {
        "version": SCHEMA_VERSION,
        "build": f"balcut-{__version__}",
        "leaves": [
            {"vertices": leaf.vertices.tolist(), "depth": leaf.depth,
             "certified": leaf.certificate is not None}
            for leaf in leaves
        ],
        "crossing_weight": crossing_weight(g, leaves),
        "crossing_fraction": crossing_weight(g, leaves) / g.total_weight,
    }
