import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from balcut.errors import PreconditionViolated, SweepCutMissing
from balcut.expsketch import Embedding, normalized_laplacian_spectrum
from balcut.graph import conductance, cut_weight, volume
from balcut.oracle import (
    OracleCertificate,
    Roundable,
    cheeger_sweep_bound,
    descending_order,
    outcome_to_json,
    prefix_cuts,
    radial_sweep,
    run_oracle,
)
from balcut.reference import caterpillar_of_cliques, dense_certificate, dense_laplacian
from balcut.sdp import cut_to_embedding, dual_value

from conftest import graphs
from helpers import cheeger_input, exact_oracle_run, first_non_edge_step, normalized_extremes


def test_descending_order_breaks_ties_by_index():
    assert descending_order([1.0, 3.0, 1.0, 3.0]).tolist() == [1, 3, 0, 2]


@given(graphs(), st.integers(0, 2**32 - 1))
def test_prefix_cuts_match_direct_evaluation(g, seed):
    order = np.random.default_rng(seed).permutation(g.n)
    cut, vol = prefix_cuts(g, order)
    for i in range(1, g.n + 1):
        assert cut[i - 1] == pytest.approx(cut_weight(g, order[:i]), abs=1e-9)
        assert vol[i - 1] == pytest.approx(volume(g, order[:i]))


def test_radial_sweep_stops_before_b_over_8(dumbbell):
    g, _ = dumbbell
    radii = np.arange(g.n, dtype=float)
    table = radial_sweep(g, radii, 0.5)
    # every reported prefix is lighter than b/8 and the next one is not
    assert np.all(table.mu < 0.5 / 8)
    assert g.mu[table.order[: table.z]].sum() >= 0.5 / 8
    assert table.order[0] == g.n - 1
    with pytest.raises(PreconditionViolated):
        radial_sweep(g, -radii, 0.5)


@given(graphs(), st.integers(0, 2**32 - 1))
def test_cheeger_sweep_bound_holds(g, seed):
    rng = np.random.default_rng(seed)
    drawn = cheeger_input(g, rng)
    if drawn is None:  # a single vertex already carries more than half of mu
        return
    x, k, sigma = drawn
    mask, phi, h = cheeger_sweep_bound(g, x, k, sigma)
    assert k <= h <= int((x > 0).sum())
    assert phi == pytest.approx(conductance(g, mask))
    energy = float(x @ dense_laplacian(g) @ x)
    assert phi <= math.sqrt(2 * energy) / sigma + 1e-12


def test_cheeger_sweep_bound_preconditions(path5):
    g = path5
    x = np.array([0.3, 0.2, 0.0, 0.0, 0.0])
    with pytest.raises(PreconditionViolated):
        cheeger_sweep_bound(g, -x, 1, 0.01)
    with pytest.raises(PreconditionViolated):
        cheeger_sweep_bound(g, 10 * x, 1, 0.01)
    with pytest.raises(PreconditionViolated):
        cheeger_sweep_bound(g, x, 3, 0.01)
    with pytest.raises(PreconditionViolated):
        cheeger_sweep_bound(g, x, 1, 1.0)
    with pytest.raises(PreconditionViolated):
        cheeger_sweep_bound(g, np.array([1, 1, 1, 0, 0]) * 0.1, 1, 0.01)


def test_edge_energy_case(path5):
    g = path5
    emb = cut_to_embedding(g, [0, 1])
    out = run_oracle(emb, g, 0.5, 0.01)
    assert isinstance(out, OracleCertificate) and out.case_id == 1
    assert out.dual.alpha == 0.01 and not out.dual.beta.any() and not out.cut.any()


def test_spread_embedding_is_roundable(dumbbell):
    g, (side,) = dumbbell
    out = run_oracle(cut_to_embedding(g, side), g, 0.5, 0.1)
    assert isinstance(out, Roundable)
    assert out.diagnostics["spread_R"] >= 1 / 64


def _leg_embedding(g, leg):
    x = np.where(leg, 1.0, 0.0)
    x -= g.mu @ x
    return Embedding(x[:, None] / math.sqrt(g.mu @ x ** 2), g.mu)


def test_concentrated_embedding_gives_radial_cut():
    g, legs = caterpillar_of_cliques(40, [2, 2, 2], seed=1, bridge_weight=0.01)
    emb = _leg_embedding(g, legs[0])
    # energy is about 0.01; a threshold of sqrt(gamma) admits the leg alone
    gamma = 0.005
    out = run_oracle(emb, g, 0.5, gamma, sweep_constant=1.0)
    assert isinstance(out, OracleCertificate) and out.case_id == 3
    assert np.array_equal(out.cut, legs[0])
    assert conductance(g, out.cut) <= math.sqrt(gamma)
    assert g.mu[out.cut].sum() < 0.5 / 8
    np.testing.assert_allclose(out.dual.beta, np.where(legs[0], gamma * g.mu, 0.0))
    assert dual_value(out.dual, 0.5) >= 0.75 * gamma
    js = outcome_to_json(out, 0.5)
    assert js["case_id"] == 3 and js["cut"] == np.flatnonzero(legs[0]).tolist()


def test_missing_sweep_cut_is_reported():
    g, legs = caterpillar_of_cliques(40, [2, 2, 2], seed=1, bridge_weight=0.01)
    with pytest.raises(SweepCutMissing):
        run_oracle(_leg_embedding(g, legs[0]), g, 0.5, 0.005, sweep_constant=0.01)


@pytest.mark.parametrize("seed", range(4))
def test_contract_on_exact_iterates(seed):
    g, _ = caterpillar_of_cliques(16, [2, 3, 2], seed=seed, bridge_weight=0.05)
    nu2 = normalized_laplacian_spectrum(g)[0][1]
    gamma, b = 2.0 * nu2, 0.4
    start = first_non_edge_step(g, gamma)
    assert start is not None
    cases = set()
    for X, out in exact_oracle_run(g, b, gamma, 40, start):
        cases.add(out.case_id)
        if not isinstance(out, OracleCertificate):
            continue
        M = dense_certificate(g, out.dual)
        assert float(np.sum(M * X)) >= gamma / 64 - 1e-9
        assert dual_value(out.dual, b) >= 0.75 * gamma - 1e-12
        lo, hi = normalized_extremes(g, M)
        assert lo >= -gamma - 1e-9 and hi <= 3 + 1e-9
    assert cases - {1}
