import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdlkit.exceptions import (
    DuplicateEdge,
    GraphError,
    IncompleteOrientation,
    IsolatedNode,
    MalformedLine,
    SelfLoop,
    ShapeMismatch,
    WeightPatternMismatch,
)
from gdlkit.gnn.message_passing import MessagePassingLayer, MPVariant, mp_forward
from gdlkit.graphs.graph import Graph, Orientation, permute
from gdlkit.graphs.graph_io import read_edge_list, read_labels, write_edge_list
from gdlkit.graphs.heat import heat_flow, heat_step
from gdlkit.graphs.matrices import (
    adjacency,
    connected_components,
    degree_matrix,
    diffusive_laplacian,
    generalized_laplacian,
    incidence,
    laplacian,
    laplacian_spectrum,
)


@st.composite
def random_graphs(draw, min_nodes=1, max_nodes=12):
    n = draw(st.integers(min_value=min_nodes, max_value=max_nodes))
    rng = np.random.default_rng(draw(st.integers(min_value=0, max_value=2**32 - 1)))
    density = draw(st.floats(min_value=0.0, max_value=1.0))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return Graph(n, edges), rng


def union_find_components(g):
    parent = list(range(g.n_nodes))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, j in g.edges:
        parent[find(i)] = find(j)
    return len({find(v) for v in range(g.n_nodes)})


@pytest.fixture
def four_nodes():
    """Edges 0-1, 0-2, 1-2, 2-3 oriented 0->1, 0->2, 2->1, 3->2"""
    g = Graph(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
    o = Orientation({(0, 1): (0, 1), (0, 2): (0, 2), (1, 2): (2, 1), (2, 3): (3, 2)})
    return g, o


"""
Construction
"""
def test_graph_rejects_bad_edges():
    with pytest.raises(SelfLoop):
        Graph(3, [(1, 1)])
    with pytest.raises(DuplicateEdge):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 3)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 1)], edge_weights=[1.0, 2.0])


def test_edges_are_canonical():
    g = Graph(3, [(2, 0), (1, 0)])
    assert g.edges == ((0, 1), (0, 2))
    np.testing.assert_array_equal(g.edge_index, [[0, 1], [0, 2]])
    np.testing.assert_array_equal(g.neighbors(0), [1, 2])
    assert g.isolated_nodes().size == 0
    assert Graph(3, [(0, 1)]).isolated_nodes().tolist() == [2]


def test_message_index_grouped_by_destination(path_graph):
    src, dst = path_graph.message_index()
    assert list(zip(src, dst)) == [(1, 0), (0, 1), (2, 1), (1, 2), (3, 2), (2, 3)]
    src, dst = path_graph.message_index(self_loops=True)
    assert src.size == 2 * path_graph.num_edges + path_graph.n_nodes
    assert (0, 0) in set(zip(src.tolist(), dst.tolist()))


def test_permute_relabels_nodes(path_graph):
    g = permute(path_graph, [3, 2, 1, 0])
    assert g == path_graph
    g = permute(path_graph, [1, 0, 2, 3])
    assert g.edges == ((0, 1), (0, 2), (2, 3))
    with pytest.raises(GraphError):
        permute(path_graph, [0, 0, 1, 2])


"""
Matrix views
"""
def test_adjacency_and_degrees(four_nodes):
    g, _ = four_nodes
    np.testing.assert_array_equal(adjacency(g), [[0, 1, 1, 0], [1, 0, 1, 0], [1, 1, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_array_equal(np.diag(degree_matrix(g)), [2, 2, 3, 1])
    np.testing.assert_array_equal(adjacency(Graph(3, [])), np.zeros((3, 3)))
    np.testing.assert_array_equal(np.diag(degree_matrix(Graph(3, [(0, 1)]))), [1, 1, 0])


def test_incidence_computes_differences(four_nodes):
    g, o = four_nodes
    X = incidence(g, o)
    f = np.array([1.0, 10.0, 100.0, 1000.0])
    np.testing.assert_array_equal(X @ f, [-1 + 10, -1 + 100, 10 - 100, 100 - 1000])
    np.testing.assert_array_equal(X @ np.full(4, 7.0), np.zeros(4))
    assert np.all((X == 1).sum(axis=1) == 1) and np.all((X == -1).sum(axis=1) == 1)


def test_incomplete_orientation(four_nodes):
    g, _ = four_nodes
    with pytest.raises(IncompleteOrientation):
        incidence(g, Orientation({(0, 1): (1, 0)}))
    with pytest.raises(GraphError):
        Orientation({(0, 1): (0, 2)})


def test_path_laplacian():
    g = Graph(3, [(0, 1), (1, 2)])
    expected = [[1, -1, 0], [-1, 2, -1], [0, -1, 1]]
    np.testing.assert_array_equal(laplacian(g), expected)
    X = incidence(g, Orientation.canonical(g))
    np.testing.assert_array_equal(X.T @ X, expected)
    np.testing.assert_array_equal(laplacian(Graph(2, [])), np.zeros((2, 2)))


@settings(max_examples=200, deadline=None)
@given(sample=random_graphs())
def test_laplacian_properties(sample):
    g, rng = sample
    L = laplacian(g)
    np.testing.assert_array_equal(L, L.T)
    assert np.all(np.abs(L.sum(axis=1)) <= 1e-12)

    X_canon = incidence(g, Orientation.canonical(g))
    X_rand = incidence(g, Orientation.random(g, rng))
    np.testing.assert_array_equal(X_canon.T @ X_canon, L)
    np.testing.assert_array_equal(X_rand.T @ X_rand, L)

    spectrum = laplacian_spectrum(g)
    assert spectrum[0] >= -1e-10
    count, labels = connected_components(g)
    assert count == union_find_components(g)
    assert int(np.sum(spectrum < 1e-8)) == count
    assert labels.shape == (g.n_nodes,)


def test_triangle_spectrum(triangle):
    np.testing.assert_allclose(laplacian_spectrum(triangle), [0.0, 3.0, 3.0], atol=1e-12)


def test_two_components():
    g = Graph(5, [(0, 1), (2, 3), (3, 4)])
    count, labels = connected_components(g)
    assert count == 2
    assert labels[0] == labels[1] != labels[2] == labels[3] == labels[4]


def test_generalized_laplacian(four_nodes):
    g, _ = four_nodes
    A, n = adjacency(g), g.n_nodes
    np.testing.assert_array_equal(generalized_laplacian(g, np.eye(n), A), laplacian(g))
    np.testing.assert_array_equal(generalized_laplacian(g, 2 * np.ones(n), A), 2 * laplacian(g))
    D_inv = np.diag(1.0 / g.degrees)
    np.testing.assert_allclose(generalized_laplacian(g, D_inv, A), diffusive_laplacian(g), atol=1e-12)

    weighted = 0.5 * A
    weighted[0, 1] = weighted[1, 0] = 3.0
    L_w = generalized_laplacian(g, np.eye(n), weighted)
    np.testing.assert_allclose(L_w.sum(axis=1), 0.0, atol=1e-12)
    assert L_w[0, 0] == pytest.approx(3.5)


def test_weight_pattern_mismatch(four_nodes):
    g, _ = four_nodes
    A = adjacency(g)
    extra = A.copy()
    extra[0, 3] = extra[3, 0] = 1.0
    with pytest.raises(WeightPatternMismatch):
        generalized_laplacian(g, np.eye(4), extra)
    missing = A.copy()
    missing[0, 1] = missing[1, 0] = 0.0
    with pytest.raises(WeightPatternMismatch):
        generalized_laplacian(g, np.eye(4), missing)
    with pytest.raises(ShapeMismatch):
        generalized_laplacian(g, np.eye(3), A)


def test_weighted_adjacency_from_edge_weights():
    g = Graph(3, [(0, 1), (1, 2)], edge_weights=[2.0, 0.5])
    np.testing.assert_array_equal(g.weighted_adjacency(), [[0, 2, 0], [2, 0, 0.5], [0, 0.5, 0]])
    np.testing.assert_array_equal(Graph(3, [(0, 2)]).weighted_adjacency(), adjacency(Graph(3, [(0, 2)])))


"""
Heat diffusion
"""
def test_heat_step_on_triangle(triangle):
    np.testing.assert_allclose(heat_step(triangle, [1.0, 2.0, 3.0]), [2.5, 2.0, 1.5])


@settings(max_examples=50, deadline=None)
@given(sample=random_graphs(min_nodes=2))
def test_heat_step_properties(sample):
    g, rng = sample
    if g.isolated_nodes().size:
        with pytest.raises(IsolatedNode):
            heat_step(g, np.ones(g.n_nodes))
        return

    np.testing.assert_allclose(heat_step(g, np.ones(g.n_nodes)), np.ones(g.n_nodes), atol=1e-12)
    h = rng.normal(size=(g.n_nodes, 3))
    out = heat_step(g, h)
    for v in range(g.n_nodes):
        nbrs = h[g.neighbors(v)]
        assert np.all(nbrs.min(axis=0) - 1e-12 <= out[v])
        assert np.all(out[v] <= nbrs.max(axis=0) + 1e-12)
    np.testing.assert_allclose(out, h - diffusive_laplacian(g) @ h, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(sample=random_graphs(min_nodes=2))
def test_heat_step_is_a_message_passing_layer(sample):
    g, rng = sample
    if g.isolated_nodes().size:
        return
    layer = MessagePassingLayer(3, 3, MPVariant.GENERIC)
    layer.W.value[...] = np.eye(3)
    layer.B.value[...] = 0.0
    h = rng.normal(size=(g.n_nodes, 3))
    np.testing.assert_allclose(mp_forward(layer, g, h).value, heat_step(g, h), atol=1e-12)


def test_heat_flow_converges_on_connected_graph(path_graph):
    h = np.array([4.0, 0.0, 0.0, 0.0])
    assert heat_flow(path_graph, h, 0).tolist() == h.tolist()
    # the odd cycle breaks bipartite oscillation
    g = Graph(3, [(0, 1), (1, 2), (0, 2)])
    out = heat_flow(g, [3.0, 0.0, 0.0], 60)
    np.testing.assert_allclose(out, [1.0, 1.0, 1.0], atol=1e-12)


def test_heat_step_shape_check(path_graph):
    with pytest.raises(ShapeMismatch):
        heat_step(path_graph, np.ones(3))


"""
Edge-list files
"""
def test_edge_list_round_trip(tmp_path, four_nodes):
    g, _ = four_nodes
    path = tmp_path / "graphs" / "g.txt"
    write_edge_list(g, path)
    assert read_edge_list(path) == g
    assert read_edge_list(path, n_nodes=6).n_nodes == 6

    weighted = Graph(3, [(0, 1), (1, 2)], edge_weights=[0.1, 2.5])
    write_edge_list(weighted, path)
    assert read_edge_list(path).edge_weights == (0.1, 2.5)


def test_edge_list_skips_comments(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# path graph\n0 1\n\n1 2\n")
    assert read_edge_list(path).edges == ((0, 1), (1, 2))


@pytest.mark.parametrize("text,error", [
    ("0 1\n1 2 3 4\n", MalformedLine),
    ("0 x\n", MalformedLine),
    ("0 1\n1 2 0.5\n", MalformedLine),
    ("0 -1\n", MalformedLine),
    ("0 1\n1 0\n", DuplicateEdge),
    ("0 1\n2 2\n", SelfLoop),
])
def test_edge_list_errors(tmp_path, text, error):
    path = tmp_path / "g.txt"
    path.write_text(text)
    with pytest.raises(error):
        read_edge_list(path)


def test_read_labels(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text("0 2\n2 1\n")
    np.testing.assert_array_equal(read_labels(path, 4), [2, -1, 1, -1])
    path.write_text("5 1\n")
    with pytest.raises(MalformedLine):
        read_labels(path, 4)
    path.write_text("0\n")
    with pytest.raises(MalformedLine):
        read_labels(path, 4)
