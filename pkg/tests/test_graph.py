import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import dense_laplacian, non_edge, random_connected, random_graph, union_find_connected
from risconnect.graph import (
    UAV,
    UE,
    Graph,
    build_graph,
    criticality,
    criticality_bound,
    criticality_from_laplacian,
    criticality_report,
    edge_weight,
    fiedler_value,
    incidence,
    is_connected,
    laplacian,
    rank_one_add,
    read_edge_list,
    remove_node,
    spectrum,
    write_edge_list,
)
from risconnect.scenario import Scenario

SQ2 = 1 / math.sqrt(2)


def complete(n, w=1.0):
    return Graph(n, tuple((i, j, w) for i in range(n) for j in range(i + 1, n)))


def path(n):
    return Graph(n, tuple((i, i + 1, 1.0) for i in range(n - 1)))


# Graph type

def test_graph_normalises_and_validates():
    g = Graph(3, ((2, 0, 1.0), (1, 0, 2.0)))
    assert g.edges == ((0, 1, 2.0), (0, 2, 1.0))
    assert g.neighbors(0) == {1, 2}
    for bad in (((0, 0, 1.0),), ((0, 1, 1.0), (1, 0, 1.0)), ((0, 1, 0.0),), ((0, 5, 1.0),)):
        with pytest.raises(ValueError):
            Graph(3, bad)
    with pytest.raises(ValueError, match="UE-UE"):
        Graph(3, ((0, 1, 1.0),), (UE, UE, UAV))


def test_build_graph_thresholds():
    s = Scenario(ues=[[0, 0]], uavs=[[0, 0, 10]], riss=np.zeros((0, 3)))
    g = build_graph(s)
    assert g.edges == ((0, 1, 1.0),)
    assert g.node_kinds == (UE, UAV)
    far = Scenario(ues=[[0, 0]], uavs=[[500, 0, 50], [500, 200, 50]], riss=np.zeros((0, 3)))
    g = build_graph(far)
    assert g.n_edges == 0
    assert fiedler_value(laplacian(g)) == 0.0
    near = Scenario(ues=[[0, 0]], uavs=[[500, 0, 50], [500, 150, 50]], riss=np.zeros((0, 3)))
    assert build_graph(near).edges == ((1, 2, 1.0),)


def test_weighted_base_uses_criticality():
    s = Scenario(ues=[[0, 0], [10, 0]], uavs=[[0, 5, 50], [10, 5, 50]], riss=np.zeros((0, 3)))
    g = build_graph(s, weighted_base=True)
    crit = criticality_report(build_graph(s)).values
    for i, j, w in g.edges:
        assert w == pytest.approx(1 / (crit[i] + crit[j]))


# Laplacian and spectrum

def test_triangle_laplacian():
    L = laplacian(complete(3))
    np.testing.assert_array_equal(L, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_path3_spectrum_and_fiedler():
    s = spectrum(laplacian(path(3)))
    np.testing.assert_allclose(s.eigenvalues, [0, 1, 3], atol=1e-12)
    np.testing.assert_allclose(s.fiedler_vector, [SQ2, 0, -SQ2], atol=1e-12)


def test_single_heavy_edge():
    s = spectrum(laplacian(Graph(2, ((0, 1, 5.0),))))
    np.testing.assert_allclose(s.eigenvalues, [0, 10], atol=1e-12)


def test_k4_and_disconnected():
    assert spectrum(laplacian(complete(4))).fiedler_value == pytest.approx(4, abs=1e-12)
    two = Graph(4, ((0, 1, 1.0), (2, 3, 1.0)))
    s = spectrum(laplacian(two))
    assert s.fiedler_value == pytest.approx(0, abs=1e-12)
    assert abs(s.fiedler_vector.sum()) < 1e-12
    assert s.degenerate is False


def test_complete_graph_flags_degenerate():
    assert spectrum(laplacian(complete(5))).degenerate


def test_spectrum_rejects_asymmetric():
    with pytest.raises(ValueError):
        spectrum(np.array([[1.0, -1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        spectrum(np.ones((2, 3)))


def test_spectrum_single_node():
    s = spectrum(np.zeros((1, 1)))
    assert s.fiedler_value == 0.0


def test_spectrum_general_symmetric():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(spectrum(A).eigenvalues, [1, 3])


def test_incidence_outer_product():
    a = incidence(4, 1, 3)
    L = laplacian(Graph(4, ((1, 3, 2.5),)))
    np.testing.assert_array_equal(L, 2.5 * np.outer(a, a))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 14), st.floats(0.05, 0.9))
def test_laplacian_invariants(seed, n, p):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p)
    L = laplacian(g)
    np.testing.assert_allclose(L, dense_laplacian(n, g.edges), atol=1e-12)
    np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-9)
    s = spectrum(L)
    assert s.eigenvalues[0] > -1e-8 and abs(s.eigenvalues[0]) < 1e-8
    assert np.all(np.diff(s.eigenvalues) >= -1e-12)
    v = s.fiedler_vector
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    assert abs(v.sum()) < 1e-8
    assert np.linalg.norm(L @ v - s.fiedler_value * v) < 1e-8
    first = v[np.abs(v) > 1e-12][0]
    assert first > 0
    connected = union_find_connected(n, g.edges)
    assert (s.fiedler_value > 1e-9) == connected
    assert is_connected(g) == connected


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 12), st.floats(0.01, 3.0))
def test_edge_addition_interlaces(seed, n, w):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.4)
    e = non_edge(rng, g)
    if e is None:
        return
    L = laplacian(g)
    old = spectrum(L).eigenvalues
    new = spectrum(rank_one_add(L, *e, w)).eigenvalues
    assert np.all(new >= old - 1e-8)
    assert np.all(new[:-1] <= old[1:] + 1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 12), st.integers(1, 4))
def test_supergradient_inequality(seed, n, k):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.4)
    L = laplacian(g)
    s = spectrum(L)
    v = s.fiedler_vector
    Y = np.zeros_like(L)
    for _ in range(k):
        i, j = rng.choice(n, 2, replace=False)
        Y = rank_one_add(Y, int(i), int(j), float(rng.uniform(0.01, 2.0)))
    assert fiedler_value(L + Y) <= s.fiedler_value + np.trace(Y @ np.outer(v, v)) + 1e-9


# criticality

@pytest.mark.parametrize("V", range(4, 9))
def test_complete_graph_criticality(V):
    g = complete(V)
    for n in range(V):
        assert criticality(g, n) == pytest.approx(1 / (V - 1), abs=1e-12)
    assert criticality_bound(V) == pytest.approx(1 / (V - 1), abs=1e-15)


def test_k4_criticality_tight():
    L = laplacian(complete(4))
    c, clamped = criticality_from_laplacian(L, 2)
    assert c == pytest.approx(1 / 3, abs=1e-12) and not clamped
    assert criticality_bound(fiedler_value(L)) == pytest.approx(1 / 3, abs=1e-12)


def test_articulation_node_clamped():
    rep = criticality_report(path(4))
    assert rep.values[1] == pytest.approx(1e5)
    assert rep.clamped[1] and rep.clamped[2]
    assert not rep.clamped[0]
    assert rep.epsilon == 1e-5
    # a leaf leaves a path of three behind: lambda2 = 1
    assert rep.values[0] == pytest.approx(1.0, abs=1e-12)


def test_criticality_errors_and_small_graphs():
    with pytest.raises(IndexError):
        criticality(path(3), 3)
    c, clamped = criticality_from_laplacian(laplacian(Graph(2, ((0, 1, 1.0),))), 0)
    assert clamped and c == pytest.approx(1e5, rel=1e-12)


def test_criticality_bound_values():
    assert criticality_bound(4) == pytest.approx(1 / 3)
    assert criticality_bound(2) == 1
    assert criticality_bound(1) == math.inf


def test_report_subset_of_nodes():
    rep = criticality_report(complete(5), nodes=[3])
    assert np.isnan(rep.values[0]) and rep.values[3] == pytest.approx(0.25)


def test_remove_node_matches_rebuild():
    rng = np.random.default_rng(4)
    g = random_graph(rng, 7, 0.5)
    for n in range(7):
        keep = [k for k in range(7) if k != n]
        idx = {k: m for m, k in enumerate(keep)}
        sub = Graph(6, tuple((idx[i], idx[j], w) for i, j, w in g.edges if n not in (i, j)))
        np.testing.assert_allclose(remove_node(laplacian(g), n), laplacian(sub), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 11), st.booleans())
def test_node_removal_lowers_lambda2_by_at_most_one(seed, n, weighted):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.5, weighted=False)
    L = laplacian(g)
    lam = fiedler_value(L)
    for k in range(n):
        assert fiedler_value(remove_node(L, k)) >= lam - 1 - 1e-9


def test_edge_weight_examples():
    assert edge_weight(1 / 3, 1 / 3) == pytest.approx(1.5)
    assert edge_weight(1e5, 1 / 3) == pytest.approx(1e-5, rel=1e-4)
    for V in range(3, 9):
        assert edge_weight(1 / (V - 1), 1 / (V - 1)) == pytest.approx((V - 1) / 2)
    with pytest.raises(ValueError):
        edge_weight(0.0, 1.0)


def test_rank_one_add():
    L = laplacian(path(3))
    np.testing.assert_array_equal(rank_one_add(L, 0, 1, 0.0), L)
    C3 = rank_one_add(L, 0, 2, 1.0)
    assert fiedler_value(C3) == pytest.approx(3, abs=1e-12)
    with pytest.raises(ValueError):
        rank_one_add(L, 1, 1, 1.0)
    # input untouched
    np.testing.assert_array_equal(L, laplacian(path(3)))


def test_edge_list_round_trip():
    rng = np.random.default_rng(2)
    g = random_connected(rng, 6)
    text = write_edge_list(g)
    assert text.splitlines()[0] == f"6 {g.n_edges}"
    assert read_edge_list(text) == g
    with pytest.raises(ValueError):
        read_edge_list("3 2\n0 1 1.0\n")
