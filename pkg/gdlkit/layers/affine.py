from typing import Union

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import Tensor, Variable
from gdlkit.exceptions import ShapeMismatch
from gdlkit.layers.base_layer import BaseLayer, Parameter, layer_factory


@layer_factory(1)
class AffineLayer(BaseLayer):
    """Affine map x -> xW + b applied to every row of a batch

    Attributes:
        W: d x n weight matrix
        b: bias of length n
    """
    def __init__(self, d: int, n: int) -> None:
        super().__init__()
        self.in_dim, self.out_dim = d, n
        self.W = Parameter((d, n), role="weight", fan_in=d, fan_out=n, name="W")
        self.b = Parameter((n,), role="bias", fan_in=d, fan_out=n, name="b")
        self.params = [self.W, self.b]

    def forward(self, x: Union[Variable, Tensor]) -> Variable:
        x = ops.lift(x)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeMismatch(f"affine layer expects batch x {self.in_dim}, got {x.shape}")
        return ops.add_bias(ops.matmul(x, self.W), self.b)


def affine_forward(layer: AffineLayer, x: Union[Variable, Tensor]) -> Variable:
    return layer.forward(x)
