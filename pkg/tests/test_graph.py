import numpy as np
import pytest
import scipy.sparse as sp

from diffrec import EmptyGraphError, as_link_array, build_graph, sparsity

from conftest import TOY_LINKS


def test_toy_graph_structure(toy_graph):
    g = toy_graph
    assert (g.num_users, g.num_objects, g.num_links) == (3, 4, 7)
    assert g.user_degrees.tolist() == [2, 2, 3]
    assert g.object_degrees.tolist() == [1, 3, 2, 1]
    assert g.objects_of(0).tolist() == [0, 1]
    assert g.objects_of(2).tolist() == [1, 2, 3]
    assert g.users_of(1).tolist() == [0, 1, 2]
    assert g.users_of(3).tolist() == [2]


def test_links_round_trip(toy_graph):
    rebuilt = build_graph(toy_graph.links())
    assert rebuilt.links().tolist() == [list(link) for link in sorted(TOY_LINKS)]


def test_duplicates_collapse():
    g = build_graph(TOY_LINKS + [(0, 1), (2, 3), (2, 3)])
    assert g.num_links == 7


def test_unsorted_input_sorts_adjacency():
    g = build_graph([(1, 3), (1, 0), (0, 2), (1, 1)])
    assert g.objects_of(1).tolist() == [0, 1, 3]
    assert g.users_of(2).tolist() == [0]


def test_empty_graph():
    g = build_graph([])
    assert (g.num_users, g.num_objects, g.num_links) == (0, 0, 0)
    with pytest.raises(EmptyGraphError):
        sparsity(g)


def test_explicit_sizes_pad_isolated_nodes():
    g = build_graph([(0, 0)], num_users=3, num_objects=5)
    assert (g.num_users, g.num_objects) == (3, 5)
    assert g.user_degrees.tolist() == [1, 0, 0]
    assert g.objects_of(2).size == 0
    assert g.object_degrees.tolist() == [1, 0, 0, 0, 0]


def test_explicit_sizes_below_max_index_rejected():
    with pytest.raises(ValueError):
        build_graph([(0, 4)], num_objects=3)
    with pytest.raises(ValueError):
        build_graph([(4, 0)], num_users=3)


def test_invalid_links_rejected():
    with pytest.raises(ValueError):
        build_graph([(-1, 0)])
    with pytest.raises(ValueError):
        build_graph([(0.5, 1)])
    with pytest.raises(ValueError):
        build_graph(np.zeros((2, 3)))


def test_index_range_errors(toy_graph):
    with pytest.raises(IndexError):
        toy_graph.objects_of(3)
    with pytest.raises(IndexError):
        toy_graph.users_of(-1)


def test_sparse_matrix_input(toy_graph):
    mat = sp.coo_matrix(
        (np.ones(len(TOY_LINKS)),
         ([u for u, _ in TOY_LINKS], [o for _, o in TOY_LINKS])),
        shape=(3, 4))
    g = build_graph(mat)
    assert g.links().tolist() == toy_graph.links().tolist()


def test_as_link_array_shapes():
    assert as_link_array([]).shape == (0, 2)
    assert as_link_array([(1, 2)]).dtype == np.int64
    with pytest.raises(ValueError):
        as_link_array([[1, 2, 3]])


def test_arrays_immutable(toy_graph):
    with pytest.raises(ValueError):
        toy_graph.user_indices[0] = 5
    with pytest.raises(ValueError):
        toy_graph.user_degrees[0] = 5


def test_sparsity_value(toy_graph):
    assert sparsity(toy_graph) == pytest.approx(7 / 12)


def test_scipy_views_match(toy_graph):
    dense = toy_graph.user_object_matrix.toarray()
    expected = np.zeros((3, 4))
    for u, o in TOY_LINKS:
        expected[u, o] = 1.0
    assert np.array_equal(dense, expected)
    assert np.array_equal(toy_graph.object_user_matrix.toarray(), expected.T)
