from typing import Union

import numpy as np

from gdlkit.autodiff.tensor import DTYPE, Tensor
from gdlkit.exceptions import ShapeMismatch
from gdlkit.graphs.graph import Graph
from gdlkit.graphs.matrices import inverse_degrees


def heat_step(g: Graph, h: Union[Tensor, list]) -> Tensor:
    """One explicit Euler step of graph heat flow, h <- D^-1 A h

    Every node takes the mean of its neighbors' values, channel by channel.

    :param h: |V| vector or |V| x n feature matrix
    :raises IsolatedNode: if a node has no neighbors
    """
    h = np.asarray(h, dtype=DTYPE)
    if h.shape[:1] != (g.n_nodes,):
        raise ShapeMismatch(f"features for {h.shape[0] if h.ndim else 0} nodes on a graph of {g.n_nodes}")
    inv = inverse_degrees(g)
    out = np.asarray(g.adjacency_sparse @ h)
    return out * (inv if h.ndim == 1 else inv[:, None])


def heat_flow(g: Graph, h: Union[Tensor, list], steps: int) -> Tensor:
    for _ in range(steps):
        h = heat_step(g, h)
    return np.asarray(h, dtype=DTYPE)
