from enum import Enum
from typing import List, Sequence, Union

import numpy as np

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import Tensor, Variable
from gdlkit.exceptions import ShapeMismatch
from gdlkit.layers.base_layer import BaseLayer, layer_factory


class PoolKind(Enum):
    MAX = "max"
    MEAN = "mean"


@layer_factory(5)
class PoolSpec(BaseLayer):
    """PoolSpec class
    Weightless pooling P(x)_i = phi(x[window_i])

    Input entries read outside [0, d) count as zero. Windows may differ in size.

    Attributes:
        regions: zero-based input indices read by each output
        table: l x max-size gather table into the input extended by one zero
            (index d); short rows repeat their first entry
        kind: aggregate phi (max or mean)
    """
    def __init__(self, windows: Sequence[Sequence[int]], d: int, kind: PoolKind = PoolKind.MAX) -> None:
        super().__init__()
        self.regions = [[int(k) for k in w] for w in windows]
        if not self.regions or any(len(w) == 0 for w in self.regions):
            raise ShapeMismatch("pooling needs at least one window and no empty windows")
        self.kind = PoolKind(kind)
        self.in_dim, self.out_dim = d, len(self.regions)

        width = max(len(w) for w in self.regions)
        self.table = np.empty((self.out_dim, width), dtype=np.int64)
        # mean pooling as x_ext @ averaging, one column per output
        self.averaging = np.zeros((d + 1, self.out_dim))
        for i, w in enumerate(self.regions):
            extended = [k if 0 <= k < d else d for k in w]
            self.table[i] = extended + [extended[0]] * (width - len(w))
            np.add.at(self.averaging[:, i], extended, 1.0 / len(w))

    @classmethod
    def windows(cls, d: int, size: int, stride: int = None, kind: PoolKind = PoolKind.MAX) -> "PoolSpec":
        """Sliding windows of `size` over a length-d vector (stride defaults to size)"""
        stride = stride or size
        starts = range(0, d - size + 1, stride)
        return cls([list(range(s, s + size)) for s in starts], d, kind)

    @classmethod
    def grid(cls, n: int, m: int, size: int, kind: PoolKind = PoolKind.MAX) -> "PoolSpec":
        """Non-overlapping size x size blocks of a row-major n x m image

        Trailing rows and columns that do not fill a block are dropped.
        """
        blocks: List[List[int]] = []
        for bi in range(n // size):
            for bj in range(m // size):
                blocks.append([
                    (bi * size + u) * m + (bj * size + v) for u in range(size) for v in range(size)
                ])
        return cls(blocks, n * m, kind)

    @classmethod
    def stacked(cls, spec: "PoolSpec", channels: int) -> "PoolSpec":
        """Apply spec to each of `channels` concatenated blocks of length spec.in_dim"""
        d = spec.in_dim
        shifted = [
            [k + c * d if 0 <= k < d else -1 for k in w]
            for c in range(channels) for w in spec.regions
        ]
        return cls(shifted, d * channels, spec.kind)

    def forward(self, x: Union[Variable, Tensor]) -> Variable:
        x = ops.lift(x)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeMismatch(f"pooling expects batch x {self.in_dim}, got {x.shape}")
        extended = ops.concat([x, np.zeros((x.shape[0], 1))], axis=1)
        if self.kind is PoolKind.MAX:
            return ops.max(ops.take(extended, self.table), axis=2)
        return ops.matmul(extended, self.averaging)


def pool_forward(spec: PoolSpec, x: Union[Variable, Tensor]) -> Variable:
    """Pool a single vector (or a batch)"""
    x = ops.lift(x)
    if x.ndim == 1:
        return ops.reshape(spec.forward(ops.reshape(x, (1, x.shape[0]))), (spec.out_dim,))
    return spec.forward(x)
