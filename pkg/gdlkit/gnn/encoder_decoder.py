import logging
from typing import List, Optional, Sequence, Union

import numpy as np
from tabulate import tabulate

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import Tensor, Variable
from gdlkit.exceptions import ShapeMismatch
from gdlkit.graphs.graph import Graph
from gdlkit.layers.base_layer import BaseLayer, Parameter
from gdlkit.layers.model import Model, WeightVectorMixin

logger = logging.getLogger(__name__)


class EncoderDecoder(WeightVectorMixin):
    """EncoderDecoder class
    Graph encoder producing node embeddings followed by a rowwise classifier

    Attributes:
        encoder: message-passing or attention layers, applied in order
        decoder: nn Model applied to every embedding row (empty for identity)
    """
    def __init__(self, encoder: Sequence[BaseLayer], decoder: Optional[Model] = None) -> None:
        self.encoder = list(encoder)
        self.decoder = decoder if decoder is not None else Model()
        for k in range(1, len(self.encoder)):
            if self.encoder[k - 1].out_dim != self.encoder[k].in_dim:
                raise ShapeMismatch(
                    f"encoder layer {k} expects {self.encoder[k].in_dim} features, "
                    f"layer {k - 1} produces {self.encoder[k - 1].out_dim}"
                )
        if self.encoder and self.decoder.layers and self.encoder[-1].out_dim != self.decoder.in_dim:
            raise ShapeMismatch(
                f"encoder produces {self.encoder[-1].out_dim} features, decoder expects {self.decoder.in_dim}"
            )

    @property
    def in_dim(self) -> int:
        return self.encoder[0].in_dim if self.encoder else self.decoder.in_dim

    @property
    def out_dim(self) -> int:
        if self.decoder.layers:
            return self.decoder.out_dim
        return self.encoder[-1].out_dim

    def iter_layers(self) -> List[BaseLayer]:
        return self.encoder + self.decoder.iter_layers()

    def parameters(self) -> List[Parameter]:
        return [p for layer in self.encoder for p in layer.parameters()] + self.decoder.parameters()

    def encode(self, g: Graph, H0: Union[Variable, Tensor]) -> Variable:
        H = ops.lift(H0)
        for layer in self.encoder:
            H = layer.forward(g, H)
        return H

    def forward(self, g: Graph, H0: Union[Variable, Tensor]) -> Variable:
        return self.decoder.forward(self.encode(g, H0))

    __call__ = forward

    def describe(self) -> str:
        rows = [[f"enc{k}", repr(layer), layer.num_weights] for k, layer in enumerate(self.encoder)]
        rows += [[f"dec{k}", repr(layer), layer.num_weights] for k, layer in enumerate(self.decoder.iter_layers())]
        return tabulate(rows, headers=["#", "layer", "weights"])


def gnn_score(model: EncoderDecoder, g: Graph, H0: Union[Variable, Tensor]) -> Variable:
    """|V| x C class scores, one row per node"""
    return model.forward(g, H0)


def predict_labels(scores: Union[Variable, Tensor]) -> np.ndarray:
    """Row argmax; ties go to the lowest class index"""
    scores = scores.value if isinstance(scores, Variable) else np.asarray(scores)
    return np.argmax(scores, axis=-1)
