import numpy as np
import pytest
from hypothesis import given

from balcut.errors import EmptyOrFullCut
from balcut.expsketch import Embedding
from balcut.graph import conductance, is_b_balanced
from balcut.operators import CertificateOperator, DualCoefficients
from balcut.reference import complete_graph, dense_certificate, dense_laplacian, random_regular
from balcut.sdp import (
    certificate_to_json,
    cut_to_embedding,
    dual_value,
    edge_energy,
    evaluate_psdp,
    min_normalized_eigenvalue,
    verify_dual_feasibility,
)

from conftest import graph_and_subset


def test_cut_embedding_on_dumbbell(dumbbell):
    g, (side,) = dumbbell
    emb = cut_to_embedding(g, side)
    assert emb.variance == pytest.approx(1.0)
    np.testing.assert_allclose(emb.radii, 1.0)
    # energy is (cut weight / m) * (jump)^2 with jump 2
    assert edge_energy(emb, g) == pytest.approx(4.0 / g.m)
    report = evaluate_psdp(emb, g, 0.5, 1.0 / 21.0)
    assert report.feasible


@given(graph_and_subset())
def test_cut_embedding_properties(data):
    g, mask = data
    if not mask.any() or mask.all():
        with pytest.raises(EmptyOrFullCut):
            cut_to_embedding(g, mask)
        return
    emb = cut_to_embedding(g, mask)
    assert float(g.mu @ emb.vectors[:, 0]) == pytest.approx(0.0, abs=1e-12)
    assert emb.variance == pytest.approx(1.0)
    x = emb.vectors[:, 0]
    assert edge_energy(emb, g) == pytest.approx(x @ dense_laplacian(g) @ x / g.total_weight)
    # the relaxation: energy <= 4 phi(S)
    assert edge_energy(emb, g) <= 4 * conductance(g, mask) + 1e-12
    b = min(g.mu[mask].sum(), 1 - g.mu[mask].sum())
    assert float(np.max(emb.radii ** 2)) <= (1 - b) / b + 1e-9


def test_psdp_reports_each_violation(path5):
    g = path5
    V = np.arange(5.0)[:, None]
    report = evaluate_psdp(Embedding(V, g.mu), g, 0.5, 1e-3)
    assert not report.feasible
    assert set(report.violated) >= {"edge_energy", "variance", "radius"}


def test_dual_value():
    d = DualCoefficients(0.5, np.array([0.1, 0.0, 0.2]))
    assert dual_value(d, 0.25) == pytest.approx(0.5 - 3 * 0.3)
    js = certificate_to_json(d, 0.25, 0.01)
    assert js["gamma_certified"] == 0.01 and js["value"] == pytest.approx(dual_value(d, 0.25))


def test_complete_graph_is_certified():
    # on K_n the normalised M(alpha, 0) is (n/(n-1) - alpha) times a projection
    g = complete_graph(8)
    lam = min_normalized_eigenvalue(CertificateOperator(g, DualCoefficients.zero_beta(0.0, 8)))
    assert lam == pytest.approx(8 / 7)
    ok = verify_dual_feasibility(g, DualCoefficients.zero_beta(0.5, 8), 0.5, 0.1)
    assert ok.feasible and ok.value == pytest.approx(0.5)
    bad = verify_dual_feasibility(g, DualCoefficients.zero_beta(2.0, 8), 0.5, 0.1)
    assert not bad.feasible and "psd" in bad.violated
    low = verify_dual_feasibility(g, DualCoefficients.zero_beta(0.2, 8), 0.5, 0.1)
    assert low.violated == ("value",)


def test_dense_and_iterative_eigenvalue_agree():
    g = random_regular(200, 3, seed=4)
    rng = np.random.default_rng(0)
    dual = DualCoefficients(0.05, rng.uniform(0, 0.01, g.n) * (rng.random(g.n) < 0.1))
    op = CertificateOperator(g, dual)
    assert min_normalized_eigenvalue(op, dense=False) == pytest.approx(
        min_normalized_eigenvalue(op, dense=True), abs=1e-7)


def test_dual_feasibility_implies_no_sparse_balanced_cut(dumbbell):
    # weak duality: a feasible pair at gamma' rules out b-balanced cuts of conductance <= gamma'
    g, (side,) = dumbbell
    emb = cut_to_embedding(g, side)
    X = emb.gram()
    dual = DualCoefficients(0.3, np.zeros(g.n))
    M = dense_certificate(g, dual)
    # M . X = energy/2 - alpha * variance
    assert float(np.sum(M * X)) == pytest.approx(edge_energy(emb, g) / 2 - 0.3)
    assert is_b_balanced(g, side, 0.5)
    assert not verify_dual_feasibility(g, dual, 0.5, conductance(g, side)).feasible
