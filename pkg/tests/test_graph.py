import networkx as nx
import numpy as np
import pytest
from hypothesis import given

from balcut.errors import DisconnectedGraph, EmptyOrFullCut, InvalidParams
from balcut.graph import (
    Graph,
    as_mask,
    balance,
    conductance,
    cut_weight,
    is_b_balanced,
    largest_component,
    laplacian_apply,
    lkv_apply,
    mu_set,
    r_i_apply,
    volume,
)
from balcut.reference import dense_laplacian, dense_lks, dense_r

from conftest import graph_and_subset, graphs


def test_triangle_basics(triangle):
    assert triangle.n == 3 and triangle.m == 3
    np.testing.assert_allclose(triangle.degrees, [4.0, 3.0, 5.0])
    assert triangle.total_volume == 12.0
    assert triangle.total_weight == 6.0
    np.testing.assert_allclose(triangle.mu.sum(), 1.0)


def test_duplicate_edges_are_merged():
    g = Graph(3, [0, 1, 1, 2], [1, 0, 2, 1], [1.0, 2.0, 1.0, 1.0])
    assert g.m == 2
    np.testing.assert_allclose(sorted(g.weights), [2.0, 3.0])


@pytest.mark.parametrize(
    "n,tails,heads,weights",
    [
        (1, [], [], None),
        (3, [0, 1], [1, 1], None),
        (3, [0, 1], [1, 3], None),
        (3, [0, 1], [1, 2], [1.0, 0.0]),
        (3, [0, 1], [1, 2], [1.0, np.nan]),
        (3, [0], [1, 2], None),
    ],
)
def test_invalid_graphs_rejected(n, tails, heads, weights):
    with pytest.raises(InvalidParams):
        Graph(n, tails, heads, weights)


def test_disconnected_rejected():
    with pytest.raises(DisconnectedGraph):
        Graph(4, [0, 2], [1, 3])
    with pytest.raises(DisconnectedGraph):
        Graph(3, [0], [1])


def test_largest_component_relabels():
    n, t, h, w, members = largest_component(6, [0, 1, 3, 4], [1, 2, 4, 5], [1.0, 2.0, 1.0, 1.0])
    assert n == 3
    np.testing.assert_array_equal(members, [0, 1, 2])
    Graph(n, t, h, w)


def test_set_functions_on_dumbbell(dumbbell):
    g, (side,) = dumbbell
    assert cut_weight(g, side) == 1.0
    assert volume(g, side) == 21.0
    assert mu_set(g, side) == pytest.approx(0.5)
    assert conductance(g, side) == pytest.approx(1.0 / 21.0)
    assert balance(g, side) == pytest.approx(0.5)
    assert is_b_balanced(g, side, 0.5)
    assert not is_b_balanced(g, [0], 0.2)


def test_index_sets_and_masks_agree(dumbbell):
    g, _ = dumbbell
    idx = [0, 3, 7]
    assert cut_weight(g, idx) == cut_weight(g, as_mask(g, idx))
    with pytest.raises(InvalidParams):
        as_mask(g, [0, 0])
    with pytest.raises(InvalidParams):
        as_mask(g, [g.n])
    with pytest.raises(InvalidParams):
        as_mask(g, np.zeros(3, dtype=bool))


def test_conductance_of_trivial_cut_raises(path5):
    with pytest.raises(EmptyOrFullCut):
        conductance(path5, [])
    with pytest.raises(EmptyOrFullCut):
        conductance(path5, np.ones(5, dtype=bool))


def test_laplacian_matches_networkx(rng):
    h = nx.gnm_random_graph(30, 80, seed=3)
    h = h.subgraph(max(nx.connected_components(h), key=len)).copy()
    h = nx.convert_node_labels_to_integers(h)
    for u, v in h.edges():
        h[u][v]["weight"] = float(rng.uniform(0.5, 2))
    e = np.array([(u, v, d["weight"]) for u, v, d in h.edges(data=True)])
    g = Graph(h.number_of_nodes(), e[:, 0].astype(int), e[:, 1].astype(int), e[:, 2])
    ref = nx.laplacian_matrix(h, nodelist=range(h.number_of_nodes())).toarray()
    np.testing.assert_allclose(dense_laplacian(g), ref, atol=1e-12)


@given(graph_and_subset())
def test_cut_weight_matches_quadratic_form(data):
    g, mask = data
    x = mask.astype(float)
    assert cut_weight(g, mask) == pytest.approx(x @ dense_laplacian(g) @ x, abs=1e-9)


@given(graph_and_subset())
def test_cut_is_symmetric(data):
    g, mask = data
    assert cut_weight(g, mask) == pytest.approx(cut_weight(g, ~mask))
    if mask.any() and not mask.all():
        assert conductance(g, mask) == pytest.approx(conductance(g, ~mask))
        assert 0 < conductance(g, mask) <= 1 + 1e-12


@given(graphs())
def test_operator_applies_match_dense(g):
    rng = np.random.default_rng(g.n)
    x = rng.standard_normal((g.n, 3))
    np.testing.assert_allclose(laplacian_apply(g, x), dense_laplacian(g) @ x, atol=1e-10)
    np.testing.assert_allclose(lkv_apply(g, x), dense_lks(g) @ x, atol=1e-12)
    np.testing.assert_allclose(lkv_apply(g, x[:, 0]), dense_lks(g) @ x[:, 0], atol=1e-12)
    i = int(rng.integers(g.n))
    np.testing.assert_allclose(r_i_apply(g, i, x), dense_r(g, i) @ x, atol=1e-12)
    np.testing.assert_allclose(r_i_apply(g, i, x[:, 1]), dense_r(g, i) @ x[:, 1], atol=1e-12)


def test_apply_rejects_wrong_length(path5):
    with pytest.raises(InvalidParams):
        laplacian_apply(path5, np.ones(4))


@given(graphs())
def test_induced_subgraph_components(g):
    rng = np.random.default_rng(g.n + 1)
    keep = rng.random(g.n) < 0.6
    if not keep.any():
        keep[0] = True
    parts = g.induced_subgraph(keep)
    covered = np.concatenate([idx for _, idx in parts])
    np.testing.assert_array_equal(np.sort(covered), np.flatnonzero(keep))
    inner = sum(sub.total_weight for sub, _ in parts if sub is not None)
    expected = g.weights[keep[g.tails] & keep[g.heads]].sum()
    assert inner == pytest.approx(expected)
