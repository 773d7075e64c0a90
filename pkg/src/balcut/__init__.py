"""Balanced graph partitioning with certified near-expander outcomes.

The public entry point is :func:`balcut`, which either returns a balanced
low-conductance cut or a dual certificate that no such cut exists, together
with a small cut that overlaps every low-conductance unbalanced cut.
"""

__version__ = "0.1.0"

from .errors import (
    BalcutError,
    ContractViolation,
    DisconnectedGraph,
    GraphFormatError,
    InputError,
    InvalidParams,
    NotApplicable,
)
from .graph import Graph, balance, conductance, cut_weight, is_b_balanced, volume
from .formats import read_graph, write_edge_list, parse_edge_list
from .operators import DualCoefficients, UpdateAccumulator, accumulate
from .expsketch import Embedding, SketchConfig, expv, sketch_embedding
from .sdp import cut_to_embedding, evaluate_psdp, verify_dual_feasibility
from .oracle import Roundable, OracleCertificate, run_oracle, radial_sweep
from .rounding import RoundingConfig, proj_round
from .driver import (
    BalancedCut,
    Certificate,
    RunConfig,
    balcut,
    certify_no_balanced_cut,
    decompose,
    mmw_regret_check,
)
