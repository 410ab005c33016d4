"""
Neighborhood-aggregation layers

    Generic:     h_v' = sigma(W mean_{u in N(v)} h_u + B h_v)
    GraphSAGE:   h_v' = sigma(W sum_{u in N(v)} h_u + B h_v)
    KipfWelling: H'   = sigma(D^-1 (A + I) H W^T), degrees taken from A + I

Features are stored node-major (|V| x n) so W acts as H W^T.
"""
import logging
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable
from gdlkit.exceptions import ShapeMismatch
from gdlkit.graphs.graph import Graph
from gdlkit.graphs.matrices import inverse_degrees
from gdlkit.layers.activations import Activation, activate
from gdlkit.layers.base_layer import BaseLayer, Parameter, layer_factory

logger = logging.getLogger(__name__)


class MPVariant(Enum):
    GENERIC = "mp"
    KIPF_WELLING = "gcn"
    GRAPHSAGE = "sage"


def propagation_matrix(g: Graph, variant: MPVariant) -> sp.csr_matrix:
    """Sparse neighbor operator applied to H before the weight map"""
    A = g.adjacency_sparse
    if variant is MPVariant.GRAPHSAGE:
        return A
    if variant is MPVariant.GENERIC:
        return sp.diags(inverse_degrees(g)) @ A
    A_hat = A + sp.identity(g.n_nodes, dtype=DTYPE, format="csr")
    deg_hat = np.asarray(A_hat.sum(axis=1)).reshape(-1)
    return (sp.diags(1.0 / deg_hat) @ A_hat).tocsr()


@layer_factory(6)
class MessagePassingLayer(BaseLayer):
    """MessagePassingLayer class

    Attributes:
        W: out x in neighbor weight
        B: out x in self weight (absent for KipfWelling, where B == W)
        activation: sigma, None for identity
        variant: aggregation rule
    """
    def __init__(self, in_dim: int, out_dim: int, variant: MPVariant = MPVariant.GENERIC,
                 activation: Optional[Activation] = None) -> None:
        super().__init__()
        self.in_dim, self.out_dim = in_dim, out_dim
        self.variant = MPVariant(variant)
        self.activation = activation
        self.W = Parameter((out_dim, in_dim), role="weight", fan_in=in_dim, fan_out=out_dim, name="W")
        self.params = [self.W]
        self.B: Optional[Parameter] = None
        if self.variant is not MPVariant.KIPF_WELLING:
            self.B = Parameter((out_dim, in_dim), role="weight", fan_in=in_dim, fan_out=out_dim, name="B")
            self.params.append(self.B)
        self._cached: Optional[Tuple[Graph, sp.csr_matrix]] = None

    def operator(self, g: Graph) -> sp.csr_matrix:
        if self._cached is None or self._cached[0] is not g:
            self._cached = (g, propagation_matrix(g, self.variant))
        return self._cached[1]

    def forward(self, g: Graph, H) -> Variable:
        H = ops.lift(H)
        if H.ndim != 2 or H.shape != (g.n_nodes, self.in_dim):
            raise ShapeMismatch(f"expected a {g.n_nodes} x {self.in_dim} feature matrix, got {H.shape}")
        agg = ops.sparse_matmul(self.operator(g), H)
        out = ops.matmul(agg, ops.transpose(self.W))
        if self.B is not None:
            out = ops.add(out, ops.matmul(H, ops.transpose(self.B)))
        return activate(self.activation, out) if self.activation is not None else out

    def __repr__(self) -> str:
        return f"MessagePassingLayer[{self.variant.value}]({self.in_dim} -> {self.out_dim})"


def mp_forward(layer: MessagePassingLayer, g: Graph, H) -> Variable:
    return layer.forward(g, H)
