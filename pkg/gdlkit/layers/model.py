"""
Layer composition and the flat weight vector view
"""
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from tabulate import tabulate

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable, zero_grads
from gdlkit.exceptions import ShapeMismatch
from gdlkit.layers.activations import RELU, Activation
from gdlkit.layers.affine import AffineLayer
from gdlkit.layers.base_layer import BaseLayer, Parameter
from gdlkit.layers.conv import ChannelStack, Conv2dSpec
from gdlkit.layers.pool import PoolKind, PoolSpec

logger = logging.getLogger(__name__)

LayerEntry = Tuple[BaseLayer, Optional[Activation]]


class WeightVectorMixin:
    """Flat weight vector view over `parameters()`, in layer order"""

    def parameters(self) -> List[Parameter]:
        raise NotImplementedError

    @property
    def num_weights(self) -> int:
        return int(sum(p.value.size for p in self.parameters()))

    def weight_view(self) -> Tensor:
        params = self.parameters()
        if not params:
            return np.zeros(0, dtype=DTYPE)
        return np.concatenate([p.value.reshape(-1) for p in params])

    def load_weight_view(self, w: Tensor) -> None:
        w = np.asarray(w, dtype=DTYPE).reshape(-1)
        if w.size != self.num_weights:
            raise ShapeMismatch(f"weight vector has {w.size} entries, model has {self.num_weights}")
        offset = 0
        for p in self.parameters():
            size = p.value.size
            p.value[...] = w[offset:offset + size].reshape(p.shape)
            offset += size

    def grad_view(self) -> Tensor:
        params = self.parameters()
        if not params:
            return np.zeros(0, dtype=DTYPE)
        return np.concatenate([p.grad.reshape(-1) for p in params])

    def zero_grads(self) -> None:
        zero_grads(self.parameters())


class Model(WeightVectorMixin):
    """Model class
    F = G o H_{L-1} o ... o H_1, each H_k a layer followed by an optional activation

    Attributes:
        layers: ordered (layer, activation) pairs; the closing layer has no activation
    """
    def __init__(self, layers: Sequence[Union[BaseLayer, LayerEntry]] = ()) -> None:
        self.layers: List[LayerEntry] = [
            entry if isinstance(entry, tuple) else (entry, None) for entry in layers
        ]
        for k in range(1, len(self.layers)):
            prev, cur = self.layers[k - 1][0], self.layers[k][0]
            if prev.out_dim != cur.in_dim:
                raise ShapeMismatch(
                    f"layer {k} ({cur!r}) expects {cur.in_dim} inputs, layer {k - 1} produces {prev.out_dim}"
                )

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def in_dim(self) -> Optional[int]:
        return self.layers[0][0].in_dim if self.layers else None

    @property
    def out_dim(self) -> Optional[int]:
        return self.layers[-1][0].out_dim if self.layers else None

    def iter_layers(self) -> List[BaseLayer]:
        return [layer for layer, _ in self.layers]

    def parameters(self) -> List[Parameter]:
        return [p for layer, _ in self.layers for p in layer.parameters()]

    def forward(self, x: Union[Variable, Tensor]) -> Variable:
        """Apply every layer in order; a single vector comes back as a vector"""
        x = ops.lift(x)
        if not self.layers:
            return x
        single = x.ndim == 1
        if single:
            x = ops.reshape(x, (1, x.shape[0]))
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeMismatch(f"layer 0 expects {self.in_dim} inputs, got input of shape {x.shape}")
        for layer, act in self.layers:
            x = layer.forward(x)
            if act is not None:
                x = act(x)
        return ops.reshape(x, (x.shape[1],)) if single else x

    __call__ = forward

    def describe(self) -> str:
        rows = [
            [k, type(layer).__name__, layer.in_dim, layer.out_dim, str(act) if act else "-", layer.num_weights]
            for k, (layer, act) in enumerate(self.layers)
        ]
        return tabulate(rows, headers=["#", "layer", "in", "out", "activation", "weights"])


def model_forward(m: Model, x: Union[Variable, Tensor]) -> Variable:
    return m.forward(x)


"""
Builders
"""
def mlp(dims: Sequence[int], activation: Activation = RELU) -> Model:
    """sigma-MLP with affine layers dims[0] -> dims[1] -> ... -> dims[-1]"""
    if len(dims) < 2:
        raise ShapeMismatch(f"an MLP needs at least input and output sizes, got {list(dims)}")
    n_layers = len(dims) - 1
    return Model([
        (AffineLayer(dims[k], dims[k + 1]), activation if k < n_layers - 1 else None)
        for k in range(n_layers)
    ])


def linear_classifier(d: int, n_classes: int) -> Model:
    return mlp([d, n_classes])


def cnn(height: int, width: int, channels: int, kernel: int, pool: int,
        dims: Sequence[int], activation: Activation = RELU,
        pool_kind: PoolKind = PoolKind.MAX) -> Model:
    """sigma-CNN: channel-stacked valid conv2d, grid pooling, then an MLP head

    :param channels: number of output channels of the convolution
    :param kernel: square filter size
    :param pool: square pooling block size (1 disables pooling)
    :param dims: hidden widths followed by the class count
    """
    convs = [Conv2dSpec.valid(height, width, (kernel, kernel)) for _ in range(channels)]
    stack = ChannelStack(convs)
    entries: List[LayerEntry] = [(stack, activation)]
    feature_dim = stack.out_dim
    if pool > 1:
        oh, ow = convs[0].out_shape
        pooled = PoolSpec.stacked(PoolSpec.grid(oh, ow, pool, pool_kind), channels)
        entries.append((pooled, None))
        feature_dim = pooled.out_dim
    head = mlp([feature_dim] + list(dims), activation)
    return Model(entries + head.layers)
