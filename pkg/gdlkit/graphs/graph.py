"""
Undirected simple graphs and edge orientations
"""
import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from gdlkit.autodiff.tensor import DTYPE, Tensor
from gdlkit.exceptions import DuplicateEdge, GraphError, IncompleteOrientation, SelfLoop

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class Graph:
    """Graph class
    Immutable undirected graph without self loops or multi-edges

    Node ids are 0..n_nodes-1 in load order. Edges are stored once as (i, j)
    with i < j, sorted.

    Attributes:
        n_nodes: number of nodes
        edges: sorted tuple of (i, j) pairs, i < j
        edge_weights: optional weight per edge (aligned with edges)
        node_weights: optional weight per node
    """
    def __init__(self, n_nodes: int, edges: Iterable[Sequence[int]],
                 edge_weights: Optional[Sequence[float]] = None,
                 node_weights: Optional[Sequence[float]] = None) -> None:
        if n_nodes < 0:
            raise GraphError(f"node count must be nonnegative, got {n_nodes}")
        self.n_nodes = int(n_nodes)

        raw = [tuple(int(v) for v in e) for e in edges]
        weights = list(edge_weights) if edge_weights is not None else None
        if weights is not None and len(weights) != len(raw):
            raise GraphError(f"{len(weights)} edge weights for {len(raw)} edges")

        canon: Dict[Edge, float] = {}
        for k, (i, j) in enumerate(raw):
            if i == j:
                raise SelfLoop(f"self loop at node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise GraphError(f"edge ({i}, {j}) outside node range [0, {self.n_nodes})")
            key = (min(i, j), max(i, j))
            if key in canon:
                raise DuplicateEdge(f"edge {key} appears more than once")
            canon[key] = weights[k] if weights is not None else 1.0

        self.edges: Tuple[Edge, ...] = tuple(sorted(canon))
        self.edge_weights: Optional[Tuple[float, ...]] = (
            tuple(float(canon[e]) for e in self.edges) if weights is not None else None
        )
        self.node_weights = np.asarray(node_weights, dtype=DTYPE) if node_weights is not None else None
        if self.node_weights is not None and self.node_weights.shape != (self.n_nodes,):
            raise GraphError(f"{self.node_weights.size} node weights for {self.n_nodes} nodes")

        self._edge_index = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self._adj = self._build_adjacency()
        self._degrees = np.asarray(self._adj.getnnz(axis=1), dtype=np.int64)

    def _build_adjacency(self) -> sp.csr_matrix:
        ei = self._edge_index
        rows = np.concatenate([ei[:, 0], ei[:, 1]])
        cols = np.concatenate([ei[:, 1], ei[:, 0]])
        vals = np.ones(rows.size, dtype=DTYPE)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_nodes, self.n_nodes))

    def __repr__(self) -> str:
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.num_edges})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n_nodes == other.n_nodes and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n_nodes, self.edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_index(self) -> np.ndarray:
        """E x 2 array of (i, j), i < j"""
        return self._edge_index

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    @property
    def adjacency_sparse(self) -> sp.csr_matrix:
        return self._adj

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of node v"""
        start, stop = self._adj.indptr[v], self._adj.indptr[v + 1]
        return np.sort(self._adj.indices[start:stop])

    def isolated_nodes(self) -> np.ndarray:
        return np.flatnonzero(self._degrees == 0)

    def message_index(self, self_loops: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """(src, dst) arrays listing every directed message u -> v, grouped by dst

        Each undirected edge appears in both directions; self loops v -> v are
        appended when requested.
        """
        ei = self._edge_index
        src = np.concatenate([ei[:, 0], ei[:, 1]])
        dst = np.concatenate([ei[:, 1], ei[:, 0]])
        if self_loops:
            nodes = np.arange(self.n_nodes, dtype=np.int64)
            src, dst = np.concatenate([src, nodes]), np.concatenate([dst, nodes])
        order = np.lexsort((src, dst))
        return src[order], dst[order]

    def weighted_adjacency(self) -> Tensor:
        """Dense W_a from edge weights (plain adjacency when unweighted)"""
        W = np.zeros((self.n_nodes, self.n_nodes), dtype=DTYPE)
        weights = self.edge_weights or (1.0,) * self.num_edges
        for (i, j), w in zip(self.edges, weights):
            W[i, j] = W[j, i] = w
        return W


def permute(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel node v as perm[v]"""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n_nodes)):
        raise GraphError(f"not a permutation of {g.n_nodes} nodes")
    node_weights = None
    if g.node_weights is not None:
        node_weights = np.empty_like(g.node_weights)
        node_weights[perm] = g.node_weights
    return Graph(
        g.n_nodes,
        [(perm[i], perm[j]) for i, j in g.edges],
        edge_weights=g.edge_weights,
        node_weights=node_weights,
    )


class Orientation:
    """Orientation class
    Assignment of a direction (tail, head) to each undirected edge

    Attributes:
        direction: map from the stored edge (i, j), i < j, to (tail, head)
    """
    def __init__(self, direction: Mapping[Edge, Edge]) -> None:
        self.direction: Dict[Edge, Edge] = {}
        for (i, j), (tail, head) in direction.items():
            key = (min(i, j), max(i, j))
            if {tail, head} != set(key):
                raise GraphError(f"direction {(tail, head)} does not match edge {key}")
            self.direction[key] = (tail, head)

    @classmethod
    def canonical(cls, g: Graph) -> "Orientation":
        """Direct every edge i -> j with i < j"""
        return cls({e: e for e in g.edges})

    @classmethod
    def random(cls, g: Graph, rng: np.random.Generator) -> "Orientation":
        flips = rng.integers(0, 2, size=g.num_edges)
        return cls({
            (i, j): ((j, i) if flip else (i, j)) for (i, j), flip in zip(g.edges, flips)
        })

    def covers(self, g: Graph) -> List[Edge]:
        """Edges of g with no direction assigned"""
        return [e for e in g.edges if e not in self.direction]

    def check(self, g: Graph) -> None:
        missing = self.covers(g)
        if missing:
            raise IncompleteOrientation(f"{len(missing)} edges lack a direction, first {missing[0]}")
