"""
One and two dimensional convolutions with general index functions

A convolution output is conv(x)_i = sum_j K[alpha(i, j)] x[a(i, j)] + b_i where
entries of x or K read outside their range count as zero. The pairs (a, alpha)
are precomputed into flat gather tables, so the layer is the product x @ M(K)
with M assembled from the filter by `ops.scatter_matrix`.
"""
import logging
from typing import Callable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import Tensor, Variable
from gdlkit.exceptions import NonInjectiveIndex, ShapeMismatch
from gdlkit.layers.base_layer import BaseLayer, Parameter, layer_factory

logger = logging.getLogger(__name__)

IndexFn = Callable[[int, int], int]


class IndexMap(NamedTuple):
    """Zero-based gather tables of a convolution

    Entry k says: output out_idx[k] reads input in_idx[k] weighted by
    filter entry ker_idx[k].

    Attributes:
        l: output length
        d: input length
        r: filter length
    """
    l: int
    d: int
    r: int
    out_idx: np.ndarray
    in_idx: np.ndarray
    ker_idx: np.ndarray

    @classmethod
    def from_functions(cls, a: IndexFn, alpha: IndexFn, l: int, d: int, r: int) -> "IndexMap":
        """Tabulate 1-based index functions a, alpha on [l] x [d]

        Pairs whose input or filter index falls out of range are dropped (zero
        extension). a(i, .) must be injective over the surviving pairs.

        :raises NonInjectiveIndex: if some output reads one input twice
        """
        if min(l, d, r) < 1:
            raise ShapeMismatch(f"index map needs positive sizes, got l={l} d={d} r={r}")
        out_idx, in_idx, ker_idx = [], [], []
        for i in range(1, l + 1):
            seen = set()
            for j in range(1, d + 1):
                src, ker = a(i, j), alpha(i, j)
                if not (1 <= src <= d and 1 <= ker <= r):
                    continue
                if src in seen:
                    raise NonInjectiveIndex(f"a({i}, .) reads input {src} more than once")
                seen.add(src)
                out_idx.append(i - 1)
                in_idx.append(src - 1)
                ker_idx.append(ker - 1)
        as_arr = lambda v: np.asarray(v, dtype=np.int64)
        return cls(l, d, r, as_arr(out_idx), as_arr(in_idx), as_arr(ker_idx))

    @classmethod
    def simple(cls, d: int, r: int) -> "IndexMap":
        """a(i, j) = i + j, alpha(i, j) = j for i in 1..d-r"""
        if d - r < 1:
            raise ShapeMismatch(f"simple convolution needs d > r, got d={d} r={r}")
        return cls.from_functions(lambda i, j: i + j, lambda i, j: j, d - r, d, r)

    @classmethod
    def valid(cls, d: int, r: int, stride: int = 1) -> "IndexMap":
        """Windows fully inside the input, stepping by stride"""
        if r > d or stride < 1:
            raise ShapeMismatch(f"valid convolution needs r <= d and stride >= 1, got d={d} r={r} stride={stride}")
        l = (d - r) // stride + 1
        return cls.from_functions(lambda i, j: (i - 1) * stride + j, lambda i, j: j, l, d, r)

    @classmethod
    def same(cls, d: int, r: int) -> "IndexMap":
        """Output length d, window centered on each input (zero padded)"""
        offset = (r - 1) // 2
        return cls.from_functions(lambda i, j: i + j - 1 - offset, lambda i, j: j, d, d, r)

    @classmethod
    def identity(cls, d: int) -> "IndexMap":
        return cls.from_functions(lambda i, j: i, lambda i, j: j, d, d, 1)

    def pairs(self, i: int) -> List[Tuple[int, int]]:
        """(input, filter) pairs read by zero-based output i"""
        mask = self.out_idx == i
        return list(zip(self.in_idx[mask].tolist(), self.ker_idx[mask].tolist()))

    def product(self, other: "IndexMap") -> "IndexMap":
        """Row-major product of a row map and a column map

        Output (i, j) becomes i * other.l + j, input (a, b) becomes a * other.d + b
        and filter (alpha, beta) becomes alpha * other.r + beta.
        """
        ri = np.repeat(np.arange(self.out_idx.size), other.out_idx.size)
        ci = np.tile(np.arange(other.out_idx.size), self.out_idx.size)
        return IndexMap(
            self.l * other.l,
            self.d * other.d,
            self.r * other.r,
            self.out_idx[ri] * other.l + other.out_idx[ci],
            self.in_idx[ri] * other.d + other.in_idx[ci],
            self.ker_idx[ri] * other.r + other.ker_idx[ci],
        )


@layer_factory(2)
class Conv1dSpec(BaseLayer):
    """Conv1dSpec class
    Single output channel 1-D convolution R^d -> R^l

    Attributes:
        index_map: gather tables for a and alpha
        K: filter of length r
        bias: length l
    """
    def __init__(self, index_map: IndexMap) -> None:
        super().__init__()
        self.index_map = index_map
        self.in_dim, self.out_dim = index_map.d, index_map.l
        r = index_map.r
        self.K = Parameter((r,), role="weight", fan_in=r, fan_out=r, name="K")
        self.bias = Parameter((index_map.l,), role="bias", name="bias")
        self.params = [self.K, self.bias]

    def matrix(self) -> Variable:
        """d x l matrix M(K) such that conv(x) = x @ M(K) + bias"""
        im = self.index_map
        return ops.scatter_matrix(self.K, im.in_idx, im.out_idx, im.ker_idx, (im.d, im.l))

    def forward(self, x: Union[Variable, Tensor]) -> Variable:
        x = ops.lift(x)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeMismatch(f"conv1d expects batch x {self.in_dim}, got {x.shape}")
        return ops.add_bias(ops.matmul(x, self.matrix()), self.bias)


@layer_factory(3)
class Conv2dSpec(BaseLayer):
    """Conv2dSpec class
    Single output channel 2-D convolution R^{n x m} -> R^{r x s}

    Batches carry images flattened row-major, so the layer maps batch x (n*m)
    to batch x (r*s).

    Attributes:
        row_map: index functions a, alpha over rows
        col_map: index functions b, beta over columns
        K: filter of shape (row_map.r, col_map.r)
        bias: shape (row_map.l, col_map.l)
    """
    def __init__(self, row_map: IndexMap, col_map: IndexMap) -> None:
        super().__init__()
        self.row_map, self.col_map = row_map, col_map
        self.flat_map = row_map.product(col_map)
        self.in_shape = (row_map.d, col_map.d)
        self.out_shape = (row_map.l, col_map.l)
        self.in_dim, self.out_dim = self.flat_map.d, self.flat_map.l
        size = row_map.r * col_map.r
        self.K = Parameter((row_map.r, col_map.r), role="weight", fan_in=size, fan_out=size, name="K")
        self.bias = Parameter(self.out_shape, role="bias", name="bias")
        self.params = [self.K, self.bias]

    @classmethod
    def valid(cls, n: int, m: int, kernel: Tuple[int, int]) -> "Conv2dSpec":
        return cls(IndexMap.valid(n, kernel[0]), IndexMap.valid(m, kernel[1]))

    def matrix(self) -> Variable:
        fm = self.flat_map
        return ops.scatter_matrix(self.K, fm.in_idx, fm.out_idx, fm.ker_idx, (fm.d, fm.l))

    def forward(self, x: Union[Variable, Tensor]) -> Variable:
        x = ops.lift(x)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeMismatch(f"conv2d expects batch x {self.in_dim} (flattened {self.in_shape}), got {x.shape}")
        bias = ops.reshape(self.bias, (self.out_dim,))
        return ops.add_bias(ops.matmul(x, self.matrix()), bias)

    def as_conv1d(self) -> Conv1dSpec:
        """Equivalent 1-D convolution on row-major flattened inputs, sharing values"""
        conv = Conv1dSpec(self.flat_map)
        conv.K.value[...] = self.K.value.reshape(-1)
        conv.bias.value[...] = self.bias.value.reshape(-1)
        return conv


@layer_factory(4)
class ChannelStack(BaseLayer):
    """e convolutions applied to the same input, outputs concatenated channel by channel"""
    def __init__(self, convs: Sequence[BaseLayer]) -> None:
        super().__init__()
        if not convs:
            raise ShapeMismatch("channel stack needs at least one convolution")
        in_dims = {c.in_dim for c in convs}
        if len(in_dims) != 1:
            raise ShapeMismatch(f"stacked convolutions disagree on input size {sorted(in_dims)}")
        self.convs = list(convs)
        self.in_dim = self.convs[0].in_dim
        self.out_dim = sum(c.out_dim for c in self.convs)
        self.params = [p for c in self.convs for p in c.parameters()]

    @property
    def channels(self) -> int:
        return len(self.convs)

    def forward(self, x: Union[Variable, Tensor]) -> Variable:
        return ops.concat([c.forward(x) for c in self.convs], axis=1)


def _as_batch(x: Union[Variable, Tensor]) -> Tuple[Variable, bool]:
    x = ops.lift(x)
    if x.ndim == 1:
        return ops.reshape(x, (1, x.shape[0])), True
    return x, False


def conv1d_forward(spec: Conv1dSpec, x: Union[Variable, Tensor]) -> Variable:
    """conv1d on a single vector of length d (or a batch)"""
    xb, single = _as_batch(x)
    y = spec.forward(xb)
    return ops.reshape(y, (spec.out_dim,)) if single else y


def conv2d_forward(spec: Conv2dSpec, A: Union[Variable, Tensor]) -> Variable:
    """conv2d on a single n x m matrix, returning an r x s matrix"""
    A = ops.lift(A)
    if A.shape != spec.in_shape:
        raise ShapeMismatch(f"conv2d expects a {spec.in_shape} matrix, got {A.shape}")
    y = spec.forward(ops.reshape(A, (1, spec.in_dim)))
    return ops.reshape(y, spec.out_shape)
