"""
Matrix views of a graph and its Laplacians

Dense views are materialized on demand; training code works from the sparse
adjacency held by the graph.
"""
from typing import Tuple

import numpy as np
import scipy.sparse.csgraph as csgraph

from gdlkit.autodiff.tensor import DTYPE, Tensor
from gdlkit.exceptions import IsolatedNode, ShapeMismatch, WeightPatternMismatch
from gdlkit.graphs.graph import Graph, Orientation


def adjacency(g: Graph) -> Tensor:
    """A_ij = 1 iff {i, j} is an edge"""
    return g.adjacency_sparse.toarray()


def degree_matrix(g: Graph) -> Tensor:
    return np.diag(g.degrees.astype(DTYPE))


def incidence(g: Graph, o: Orientation) -> Tensor:
    """|E| x |V| matrix X with -1 at the tail and +1 at the head of each edge

    X f is the differential df(e) = f(head) - f(tail).

    :raises IncompleteOrientation: if some edge has no direction
    """
    o.check(g)
    X = np.zeros((g.num_edges, g.n_nodes), dtype=DTYPE)
    for k, e in enumerate(g.edges):
        tail, head = o.direction[e]
        X[k, tail] = -1.0
        X[k, head] = 1.0
    return X


def laplacian(g: Graph) -> Tensor:
    """L = D - A"""
    return degree_matrix(g) - adjacency(g)


def inverse_degrees(g: Graph) -> np.ndarray:
    isolated = g.isolated_nodes()
    if isolated.size:
        raise IsolatedNode(f"node {int(isolated[0])} has degree 0 ({isolated.size} isolated in total)")
    return 1.0 / g.degrees.astype(DTYPE)


def generalized_laplacian(g: Graph, Wv: Tensor, Wa: Tensor) -> Tensor:
    """L_g = W_v (D - W_a), D the diagonal of row sums of W_a

    :param Wv: diagonal vertex-weight matrix (or its diagonal)
    :param Wa: |V| x |V| edge weights, nonzero exactly on the edges
    :raises WeightPatternMismatch: if the support of Wa is not the edge set
    """
    n = g.n_nodes
    Wv = np.asarray(Wv, dtype=DTYPE)
    Wa = np.asarray(Wa, dtype=DTYPE)
    if Wv.ndim == 1:
        Wv = np.diag(Wv)
    if Wv.shape != (n, n) or Wa.shape != (n, n):
        raise ShapeMismatch(f"weights must be {n} x {n}, got Wv {Wv.shape} and Wa {Wa.shape}")
    if not np.array_equal(Wa != 0, adjacency(g) != 0):
        raise WeightPatternMismatch("W_a must be nonzero exactly on the edges of the graph")
    D = np.diag(Wa.sum(axis=1))
    return Wv @ (D - Wa)


def diffusive_laplacian(g: Graph) -> Tensor:
    """L_d = I - D^-1 A

    :raises IsolatedNode: if a node has degree 0
    """
    inv = inverse_degrees(g)
    return np.eye(g.n_nodes, dtype=DTYPE) - inv[:, None] * adjacency(g)


def connected_components(g: Graph) -> Tuple[int, np.ndarray]:
    """(component count, component label per node)"""
    count, labels = csgraph.connected_components(g.adjacency_sparse, directed=False)
    return int(count), labels


def laplacian_spectrum(g: Graph) -> np.ndarray:
    """Ascending eigenvalues of L"""
    return np.linalg.eigvalsh(laplacian(g))
