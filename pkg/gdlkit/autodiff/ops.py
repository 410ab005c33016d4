"""
Differentiable tensor operations

Every function takes Variables (or anything `as_tensor` accepts, lifted to a
constant), computes the forward value eagerly and records a vector-Jacobian
product on the selected tape. Broadcasting is limited to scalar operands and
row-vector bias addition; everything else requires identical shapes.
"""
from typing import Any, Callable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from gdlkit.autodiff.tape import VJP, select_tape
from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable, as_tensor, check_same_shape
from gdlkit.exceptions import DomainError, ShapeMismatch

Operand = Union[Variable, Tensor, float, Sequence]
IndexArray = Union[np.ndarray, Sequence[int]]


def lift(x: Operand) -> Variable:
    if isinstance(x, Variable):
        return x
    return Variable(as_tensor(x), requires_grad=False)


def _make(op: str, value: Tensor, parents: Tuple[Variable, ...], vjp: VJP) -> Variable:
    value = np.asarray(value, dtype=DTYPE)
    if not any(p.requires_grad for p in parents):
        return Variable(value, requires_grad=False)
    return select_tape(parents).record(op, value, parents, vjp)


def _index(idx: IndexArray) -> np.ndarray:
    return np.asarray(idx, dtype=np.int64)


"""
Elementwise arithmetic
"""
def add(a: Operand, b: Operand) -> Variable:
    if isinstance(b, (int, float)):
        return add_scalar(a, float(b))
    a, b = lift(a), lift(b)
    check_same_shape("add", a.value, b.value)
    return _make("add", a.value + b.value, (a, b), lambda g: (g, g))


def sub(a: Operand, b: Operand) -> Variable:
    if isinstance(b, (int, float)):
        return add_scalar(a, -float(b))
    a, b = lift(a), lift(b)
    check_same_shape("sub", a.value, b.value)
    return _make("sub", a.value - b.value, (a, b), lambda g: (g, -g))


def mul(a: Operand, b: Operand) -> Variable:
    a, b = lift(a), lift(b)
    check_same_shape("mul", a.value, b.value)
    av, bv = a.value, b.value
    return _make("mul", av * bv, (a, b), lambda g: (g * bv, g * av))


def div(a: Operand, b: Operand) -> Variable:
    a, b = lift(a), lift(b)
    check_same_shape("div", a.value, b.value)
    av, bv = a.value, b.value
    return _make("div", av / bv, (a, b), lambda g: (g / bv, -g * av / (bv * bv)))


def neg(a: Operand) -> Variable:
    a = lift(a)
    return _make("neg", -a.value, (a,), lambda g: (-g,))


def scale(a: Operand, c: float) -> Variable:
    """scalar x tensor"""
    a = lift(a)
    return _make("scale", c * a.value, (a,), lambda g: (c * g,))


def add_scalar(a: Operand, c: float) -> Variable:
    a = lift(a)
    return _make("add_scalar", a.value + c, (a,), lambda g: (g,))


def add_bias(x: Operand, b: Operand) -> Variable:
    """Add a row-vector bias to every row of a batch

    :param x: batch x n
    :param b: n
    """
    x, b = lift(x), lift(b)
    if x.ndim != 2 or b.ndim != 1 or x.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"add_bias: cannot add bias {b.shape} to rows of {x.shape}")
    return _make("add_bias", x.value + b.value, (x, b), lambda g: (g, g.sum(axis=0)))


def scale_rows(x: Operand, s: Operand) -> Variable:
    """Multiply row i of x by s[i]

    :param x: n x k
    :param s: n
    """
    x, s = lift(x), lift(s)
    if x.ndim != 2 or s.ndim != 1 or x.shape[0] != s.shape[0]:
        raise ShapeMismatch(f"scale_rows: cannot scale rows of {x.shape} by {s.shape}")
    xv, sv = x.value, s.value
    return _make(
        "scale_rows",
        xv * sv[:, None],
        (x, s),
        lambda g: (g * sv[:, None], (g * xv).sum(axis=1)),
    )


"""
Elementwise functions
"""
def unary(a: Operand, fn: Callable[[Tensor], Tensor],
          dfn: Callable[[Tensor, Tensor], Tensor], op: str = "unary") -> Variable:
    """Generic elementwise primitive

    :param fn: forward map applied to the raw tensor
    :param dfn: derivative, called as dfn(x, y) with y = fn(x)
    """
    a = lift(a)
    x = a.value
    y = fn(x)
    return _make(op, y, (a,), lambda g: (g * dfn(x, y),))


def exp(a: Operand) -> Variable:
    return unary(a, np.exp, lambda x, y: y, "exp")


def log(a: Operand) -> Variable:
    a = lift(a)
    if np.any(a.value <= 0):
        raise DomainError("log: received a non-positive entry")
    return unary(a, np.log, lambda x, y: 1.0 / x, "log")


def tanh(a: Operand) -> Variable:
    return unary(a, np.tanh, lambda x, y: 1.0 - y * y, "tanh")


def sqrt(a: Operand) -> Variable:
    a = lift(a)
    if np.any(a.value < 0):
        raise DomainError("sqrt: received a negative entry")
    # subgradient 0 at the origin
    return unary(a, np.sqrt, lambda x, y: np.divide(0.5, y, out=np.zeros_like(y), where=y > 0), "sqrt")


def absolute(a: Operand) -> Variable:
    # np.sign is 0 at 0, the subgradient we want
    return unary(a, np.abs, lambda x, y: np.sign(x), "abs")


"""
Linear algebra and shape manipulation
"""
def matmul(a: Operand, b: Operand) -> Variable:
    a, b = lift(a), lift(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: inner dimensions differ {a.shape} @ {b.shape}")
    av, bv = a.value, b.value
    return _make("matmul", av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def transpose(a: Operand) -> Variable:
    a = lift(a)
    if a.ndim != 2:
        raise ShapeMismatch(f"transpose expects a matrix, got shape {a.shape}")
    return _make("transpose", a.value.T, (a,), lambda g: (g.T,))


def reshape(a: Operand, shape: Tuple[int, ...]) -> Variable:
    a = lift(a)
    shape = tuple(shape)
    if int(np.prod(shape)) != a.value.size:
        raise ShapeMismatch(f"reshape: cannot view {a.shape} as {shape}")
    old = a.shape
    return _make("reshape", a.value.reshape(shape), (a,), lambda g: (g.reshape(old),))


def concat(xs: Sequence[Operand], axis: int = 0) -> Variable:
    """Concatenate along an axis (axis 0 is row-concat)"""
    xs = tuple(lift(x) for x in xs)
    if not xs:
        raise ShapeMismatch("concat needs at least one operand")
    ref = xs[0].shape
    for x in xs[1:]:
        if x.ndim != len(ref) or any(d != r for k, (d, r) in enumerate(zip(x.shape, ref)) if k != axis % len(ref)):
            raise ShapeMismatch(f"concat: shapes {[x.shape for x in xs]} do not conform along axis {axis}")
    splits = np.cumsum([x.shape[axis] for x in xs])[:-1]
    return _make(
        "concat",
        np.concatenate([x.value for x in xs], axis=axis),
        xs,
        lambda g: tuple(np.split(g, splits, axis=axis)),
    )


def sparse_matmul(S: sp.spmatrix, a: Operand) -> Variable:
    """Constant sparse matrix times a dense variable"""
    a = lift(a)
    if a.ndim != 2 or S.shape[1] != a.shape[0]:
        raise ShapeMismatch(f"sparse_matmul: {S.shape} @ {a.shape}")
    S = sp.csr_matrix(S)
    St = S.T.tocsr()
    return _make("sparse_matmul", np.asarray(S @ a.value), (a,), lambda g: (np.asarray(St @ g),))


"""
Reductions
"""
def sum(a: Operand, axis: Optional[int] = None) -> Variable:
    a = lift(a)
    shape = a.shape

    def vjp(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape),)

    return _make("sum", a.value.sum(axis=axis), (a,), vjp)


def mean(a: Operand, axis: Optional[int] = None) -> Variable:
    a = lift(a)
    count = a.value.size if axis is None else a.shape[axis]
    return scale(sum(a, axis), 1.0 / count)


def max(a: Operand, axis: Optional[int] = None) -> Variable:
    """Max-reduce; the gradient goes to the first maximal entry"""
    a = lift(a)
    av = a.value
    if axis is None:
        flat_idx = int(np.argmax(av))

        def vjp(g):
            gz = np.zeros_like(av)
            gz.reshape(-1)[flat_idx] = g
            return (gz,)

        return _make("max", av.max(), (a,), vjp)

    idx = np.expand_dims(np.argmax(av, axis=axis), axis)

    def vjp_axis(g):
        gz = np.zeros_like(av)
        np.put_along_axis(gz, idx, np.expand_dims(g, axis), axis=axis)
        return (gz,)

    return _make("max", av.max(axis=axis), (a,), vjp_axis)


def logsumexp(a: Operand, axis: int = -1) -> Variable:
    a = lift(a)
    av = a.value
    m = av.max(axis=axis, keepdims=True)
    e = np.exp(av - m)
    s = e.sum(axis=axis, keepdims=True)
    soft = e / s
    out = (m + np.log(s)).squeeze(axis)
    return _make("logsumexp", out, (a,), lambda g: (np.expand_dims(g, axis) * soft,))


def log_softmax(a: Operand, axis: int = -1) -> Variable:
    """Shift-invariant log of normalized exponentials"""
    a = lift(a)
    av = a.value
    shifted = av - av.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    soft = np.exp(out)
    return _make(
        "log_softmax",
        out,
        (a,),
        lambda g: (g - soft * g.sum(axis=axis, keepdims=True),),
    )


"""
Indexing
"""
def take(a: Operand, idx: IndexArray) -> Variable:
    """Gather along the last axis: out[..., *] = a[..., idx[*]]"""
    a = lift(a)
    idx = _index(idx)
    if a.ndim not in (1, 2):
        raise ShapeMismatch(f"take supports vectors and batches, got shape {a.shape}")
    av = a.value

    def vjp(g):
        gz = np.zeros_like(av)
        if av.ndim == 1:
            np.add.at(gz, idx, g)
        else:
            np.add.at(gz, (slice(None), idx), g)
        return (gz,)

    return _make("take", av[..., idx], (a,), vjp)


def take_rows(a: Operand, idx: IndexArray) -> Variable:
    """Gather along the first axis: out[k] = a[idx[k]]"""
    a = lift(a)
    idx = _index(idx)
    av = a.value

    def vjp(g):
        gz = np.zeros_like(av)
        np.add.at(gz, idx, g)
        return (gz,)

    return _make("take_rows", av[idx], (a,), vjp)


def segment_sum(a: Operand, segments: IndexArray, num_segments: int) -> Variable:
    """Scatter-add rows of a into num_segments buckets"""
    a = lift(a)
    segments = _index(segments)
    if segments.shape != a.shape[:1]:
        raise ShapeMismatch(f"segment_sum: {segments.shape[0]} segment ids for {a.shape[0]} rows")
    out = np.zeros((num_segments,) + a.shape[1:], dtype=DTYPE)
    np.add.at(out, segments, a.value)
    return _make("segment_sum", out, (a,), lambda g: (g[segments],))


def pick(a: Operand, labels: IndexArray) -> Variable:
    """Per-row entry a[n, labels[n]]"""
    a = lift(a)
    labels = _index(labels)
    if a.ndim != 2 or labels.shape != (a.shape[0],):
        raise ShapeMismatch(f"pick: {labels.shape} labels for scores {a.shape}")
    rows = np.arange(a.shape[0])
    av = a.value

    def vjp(g):
        gz = np.zeros_like(av)
        np.add.at(gz, (rows, labels), g)
        return (gz,)

    return _make("pick", av[rows, labels], (a,), vjp)


def scatter_matrix(values: Operand, rows: IndexArray, cols: IndexArray,
                   picks: IndexArray, shape: Tuple[int, int]) -> Variable:
    """Assemble M with M[rows[k], cols[k]] += values[picks[k]]

    Linear in `values`; convolutions are expressed as x @ M with M built from
    the filter through the index tables.
    """
    values = lift(values)
    rows, cols, picks = _index(rows), _index(cols), _index(picks)
    vv = values.value.reshape(-1)
    out = np.zeros(shape, dtype=DTYPE)
    np.add.at(out, (rows, cols), vv[picks])

    def vjp(g):
        gv = np.zeros_like(vv)
        np.add.at(gv, picks, g[rows, cols])
        return (gv.reshape(values.shape),)

    return _make("scatter_matrix", out, (values,), vjp)
