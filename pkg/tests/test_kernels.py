import numpy as np
import pytest

from balcut.errors import BreakdownNotConverged
from balcut.expsketch import (
    SketchConfig,
    _expm_lanczos,
    dense_u_epsilon,
    sketch_embedding,
    trivial_direction,
)
from balcut.kernels import accumulator_expm, warm_up
from balcut.operators import UpdateAccumulator, normalized_rows_matvec
from balcut.reference import random_regular
from balcut.selfcheck import random_graph

EPS = 1.0 / 130.0


def _acc(g, rng, t_max=20000):
    t = int(rng.integers(1, t_max))
    b = rng.uniform(0, 0.01, g.n) * (rng.random(g.n) < 0.2)
    return UpdateAccumulator(g, t / (6.0 * g.total_volume), b, float(rng.uniform(0, 3)), t)


def _complement(g, U):
    # the kernel works on the complement of the operator's null vector
    vhat = trivial_direction(g)
    return U - np.outer(vhat, vhat @ U)


def _reference(acc, U, eta=1e-12, max_dim=256):
    # the numpy kernel with full reorthogonalisation
    return _expm_lanczos(None, U, eta, max_dim,
                         rows=lambda X: 0.5 * normalized_rows_matvec(acc, X, EPS))


@pytest.mark.parametrize("seed", range(12))
def test_matches_reorthogonalised_lanczos(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 200) if seed % 2 else random_regular(int(rng.integers(25, 300)) * 2, 3, seed)
    acc = _acc(g, rng)
    U = _complement(g, rng.standard_normal((g.n, int(rng.integers(1, 20)))))
    got = accumulator_expm(acc, EPS, U, 1e-12, 256)
    ref = _reference(acc, U)
    assert np.abs(got - ref).max() <= 1e-11 * np.abs(ref).max()
    rel, theta = accumulator_expm(acc, EPS, U, 1e-12, 256, relative=True)
    np.testing.assert_allclose(rel * np.exp(-theta), got, rtol=1e-12, atol=0)


def test_zero_columns_stay_zero():
    g = random_regular(40, 3, seed=0)
    acc = _acc(g, np.random.default_rng(1))
    U = _complement(g, np.random.default_rng(2).standard_normal((g.n, 4)))
    U[:, 2] = 0.0
    out = accumulator_expm(acc, EPS, U, 1e-12, 64)
    assert not out[:, 2].any()
    np.testing.assert_allclose(out[:, [0, 1, 3]],
                               accumulator_expm(acc, EPS, U[:, [0, 1, 3]], 1e-12, 64))
    assert not accumulator_expm(acc, EPS, np.zeros((g.n, 2)), 1e-12, 64).any()


def test_nonconvergence_is_reported():
    g = random_regular(200, 3, seed=0)
    acc = UpdateAccumulator(g, 1e4 / g.total_volume, np.zeros(g.n), 0.0, 1)
    with pytest.raises(BreakdownNotConverged):
        accumulator_expm(acc, EPS, np.ones((g.n, 1)) + np.arange(g.n)[:, None], 1e-12, 3)


def test_warm_up_runs():
    warm_up()


@pytest.mark.parametrize("method", ["dense", "krylov"])
def test_sketch_survives_a_large_uniform_shift(method):
    # a big L(K_V) coefficient damps the whole complement by exp(-eps c / 2);
    # the sketch must still see the relative structure underneath
    rng = np.random.default_rng(3)
    g = random_graph(rng, 40)
    acc = UpdateAccumulator(g, 400 / (6.0 * g.total_volume), np.zeros(g.n), 2e5, 400)
    X = dense_u_epsilon(g, acc, EPS)
    assert np.all(np.isfinite(X))
    emb = sketch_embedding(g, acc, SketchConfig(delta=0.01, method=method), rng)
    V = emb.vectors - emb.v_avg
    mu = g.mu
    Xc = X - np.outer(X @ mu, np.ones(g.n)) - np.outer(np.ones(g.n), X @ mu) + mu @ X @ mu
    np.testing.assert_allclose(V @ V.T, Xc, atol=1e-8)
