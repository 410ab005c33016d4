"""
Graph attention layer

Per head, node v attends over its neighbors u with
    alpha_vu = softmax_u LeakyRELU(a^T [W h_v || W h_u])
and outputs sigma(sum_u alpha_vu W h_u). Heads are concatenated after sigma.
"""
import logging
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable
from gdlkit.exceptions import IsolatedNode, ShapeMismatch
from gdlkit.global_vars import DEFAULT_LEAKY_SLOPE
from gdlkit.graphs.graph import Graph
from gdlkit.layers.activations import Activation, activate, leaky_relu
from gdlkit.layers.base_layer import BaseLayer, Parameter, layer_factory

logger = logging.getLogger(__name__)


class AttentionCoefficients(NamedTuple):
    """Per-message attention weights, one row per head

    Attributes:
        src: attended node u of each message
        dst: attending node v of each message
        alpha: heads x messages
    """
    src: np.ndarray
    dst: np.ndarray
    alpha: np.ndarray

    def as_dict(self, head: int = 0) -> Dict[Tuple[int, int], float]:
        return {
            (int(v), int(u)): float(w) for u, v, w in zip(self.src, self.dst, self.alpha[head])
        }

    def row_sums(self, n_nodes: int) -> np.ndarray:
        """heads x n_nodes sums of alpha over each neighborhood"""
        sums = np.zeros((self.alpha.shape[0], n_nodes), dtype=DTYPE)
        for k in range(self.alpha.shape[0]):
            np.add.at(sums[k], self.dst, self.alpha[k])
        return sums


@layer_factory(7)
class GatLayer(BaseLayer):
    """GatLayer class

    Attributes:
        heads: number of attention heads K
        W: per head, out x in weight
        a: per head, attention vector of length 2 * out
        activation: sigma applied to each head output (None for identity)
        slope: LeakyRELU slope of the attention logits
        self_loops: whether each node also attends to itself
    """
    def __init__(self, in_dim: int, out_dim: int, heads: int = 1,
                 activation: Optional[Activation] = None, slope: float = DEFAULT_LEAKY_SLOPE,
                 self_loops: bool = False) -> None:
        super().__init__()
        if heads < 1:
            raise ShapeMismatch(f"a GAT layer needs at least one head, got {heads}")
        self.head_dim, self.heads = out_dim, heads
        self.in_dim, self.out_dim = in_dim, heads * out_dim
        self.activation = activation
        self.slope = slope
        self.self_loops = self_loops
        self.W: List[Parameter] = []
        self.a: List[Parameter] = []
        for k in range(heads):
            self.W.append(Parameter((out_dim, in_dim), role="weight", fan_in=in_dim, fan_out=out_dim, name=f"W{k}"))
            self.a.append(Parameter((2 * out_dim,), role="weight", fan_in=2 * out_dim, fan_out=1, name=f"a{k}"))
            self.params.extend([self.W[k], self.a[k]])
        self._dst_half = np.arange(out_dim)
        self._src_half = np.arange(out_dim, 2 * out_dim)

    def _messages(self, g: Graph) -> Tuple[np.ndarray, np.ndarray]:
        if not self.self_loops:
            isolated = g.isolated_nodes()
            if isolated.size:
                raise IsolatedNode(f"node {int(isolated[0])} has no neighbor to attend to")
        return g.message_index(self_loops=self.self_loops)

    def _head(self, k: int, g: Graph, H: Variable, src: np.ndarray, dst: np.ndarray) -> Tuple[Variable, Variable]:
        n = g.n_nodes
        Z = ops.matmul(H, ops.transpose(self.W[k]))
        a_dst = ops.reshape(ops.take(self.a[k], self._dst_half), (self.head_dim, 1))
        a_src = ops.reshape(ops.take(self.a[k], self._src_half), (self.head_dim, 1))
        s_dst = ops.reshape(ops.matmul(Z, a_dst), (n,))
        s_src = ops.reshape(ops.matmul(Z, a_src), (n,))
        logits = leaky_relu(ops.add(ops.take(s_dst, dst), ops.take(s_src, src)), self.slope)

        # neighborhood max as a constant shift
        seg_max = np.full(n, -np.inf, dtype=DTYPE)
        np.maximum.at(seg_max, dst, logits.value)
        e = ops.exp(ops.sub(logits, seg_max[dst]))
        denom = ops.segment_sum(e, dst, n)
        alpha = ops.div(e, ops.take(denom, dst))

        out = ops.segment_sum(ops.scale_rows(ops.take_rows(Z, src), alpha), dst, n)
        return out, alpha

    def forward(self, g: Graph, H) -> Variable:
        H = ops.lift(H)
        if H.ndim != 2 or H.shape != (g.n_nodes, self.in_dim):
            raise ShapeMismatch(f"expected a {g.n_nodes} x {self.in_dim} feature matrix, got {H.shape}")
        src, dst = self._messages(g)
        outs = []
        for k in range(self.heads):
            out, _ = self._head(k, g, H, src, dst)
            outs.append(activate(self.activation, out) if self.activation is not None else out)
        return outs[0] if self.heads == 1 else ops.concat(outs, axis=1)

    def attention(self, g: Graph, H) -> AttentionCoefficients:
        H = ops.lift(H)
        src, dst = self._messages(g)
        alphas = [self._head(k, g, ops.lift(H.value), src, dst)[1].value for k in range(self.heads)]
        return AttentionCoefficients(src, dst, np.stack(alphas))

    def __repr__(self) -> str:
        return f"GatLayer({self.in_dim} -> {self.heads}x{self.head_dim})"


def gat_attention(layer: GatLayer, g: Graph, H) -> AttentionCoefficients:
    return layer.attention(g, H)


def gat_forward(layer: GatLayer, g: Graph, H) -> Variable:
    return layer.forward(g, H)
