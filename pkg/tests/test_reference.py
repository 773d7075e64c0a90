import itertools

import numpy as np
import pytest
from hypothesis import given

from balcut.errors import DisconnectedGraph, InvalidParams, SizeLimit
from balcut.graph import conductance, is_b_balanced, laplacian_apply, lkv_apply, r_i_apply
from balcut.reference import (
    b_balanced,
    barbell,
    brute_min_conductance,
    caterpillar_of_cliques,
    complete_graph,
    dense_expm,
    dense_laplacian,
    dense_lks,
    dense_r,
    generate,
    gram_embedding,
    grid_graph,
    planted_bisection,
    random_regular,
)

from conftest import graphs


def _loop_min(g, b=None):
    best = np.inf
    for r in range(1, g.n):
        for s in itertools.combinations(range(g.n), r):
            if b is not None and not is_b_balanced(g, list(s), b):
                continue
            best = min(best, conductance(g, list(s)))
    return best


@given(graphs(n_max=9))
def test_brute_force_matches_loops(g):
    assert brute_min_conductance(g).best_conductance == pytest.approx(_loop_min(g))
    got = brute_min_conductance(g, b_balanced(0.3)).best_conductance
    assert got == pytest.approx(_loop_min(g, 0.3))


def test_brute_force_collects_and_limits(dumbbell):
    g, (side,) = dumbbell
    res = brute_min_conductance(g, b_balanced(0.5), collect_below=0.05)
    assert res.best_conductance == pytest.approx(conductance(g, side))
    assert len(res.all_qualifying) == 1
    mask, phi = res.all_qualifying[0]
    assert np.array_equal(mask, side) or np.array_equal(mask, ~side)
    with pytest.raises(SizeLimit):
        brute_min_conductance(random_regular(24, 3))
    # no cut meets an impossible predicate
    assert brute_min_conductance(g, lambda vol, total: vol < 0).best_conductance == np.inf


def test_dense_matrices_match_applies(dumbbell, rng):
    g, _ = dumbbell
    x = rng.standard_normal(g.n)
    np.testing.assert_allclose(dense_laplacian(g) @ x, laplacian_apply(g, x))
    np.testing.assert_allclose(dense_lks(g) @ x, lkv_apply(g, x))
    np.testing.assert_allclose(dense_r(g, 3) @ x, r_i_apply(g, 3, x))
    with pytest.raises(SizeLimit):
        dense_laplacian(random_regular(600, 3))


def test_dense_expm(rng):
    B = rng.standard_normal((6, 6))
    A = B + B.T
    lam, V = np.linalg.eigh(A)
    np.testing.assert_allclose(dense_expm(A) @ V[:, 0], np.exp(lam[0]) * V[:, 0], atol=1e-12)
    np.testing.assert_allclose(dense_expm(np.zeros((3, 3))), np.eye(3))


def test_gram_embedding(rng):
    g = complete_graph(5)
    B = rng.standard_normal((5, 3))
    emb = gram_embedding(g, B @ B.T)
    np.testing.assert_allclose(emb.gram(), B @ B.T, atol=1e-12)


def test_barbell_and_grid():
    g, (side,) = barbell(4, 2)
    assert g.n == 8 and g.m == 2 * 6 + 2
    assert conductance(g, side) == pytest.approx(2 / 14)
    h = grid_graph(3, 4)
    assert h.n == 12 and h.m == 3 * 3 + 2 * 4
    with pytest.raises(InvalidParams):
        barbell(1)


def test_caterpillar_structure():
    g, legs = caterpillar_of_cliques(10, [2, 3, 4], seed=2, bridge_weight=0.25)
    assert g.n == 19 and len(legs) == 3
    for leg, w in zip(legs, [2, 3, 4]):
        assert leg.sum() == w
        # one bridge of weight 0.25 over the leg clique's volume
        assert conductance(g, leg) == pytest.approx(0.25 / (w * (w - 1) + 0.25))
    with pytest.raises(InvalidParams):
        caterpillar_of_cliques(2, [2, 2, 2])


def test_random_regular_and_planted():
    g = random_regular(30, 3, seed=4)
    assert np.all(g.degrees == 3)
    h, (side,) = planted_bisection(20, 0.8, 0.05, seed=1)
    assert side.sum() == 10
    with pytest.raises(InvalidParams):
        planted_bisection(7, 0.5, 0.1)
    with pytest.raises(DisconnectedGraph):
        planted_bisection(20, 0.01, 0.0, attempts=2)


def test_generate_dispatch():
    g, cuts = generate("path", n=4)
    assert g.n == 4 and cuts == []
    g, cuts = generate("caterpillar", body=6, widths=[2, 2, 2], seed=1)
    assert len(cuts) == 3
    with pytest.raises(InvalidParams):
        generate("nope")
    with pytest.raises(InvalidParams):
        generate("path", size=3)
