"""
Dense tensors and differentiable variables

A Tensor is a plain float64 numpy array; a Variable wraps one together with
its accumulated gradient and the tape position of the operation that made it.
"""
from typing import Any, Optional, Sequence, Tuple, TYPE_CHECKING

import numpy as np

from gdlkit.exceptions import ShapeMismatch

if TYPE_CHECKING:
    from gdlkit.autodiff.tape import Tape

Tensor = np.ndarray
DTYPE = np.float64


def as_tensor(data: Any) -> Tensor:
    """Coerce data to a float64 tensor

    :param data: nested sequence, scalar or array
    :raises ShapeMismatch: if any dimension is zero
    """
    arr = np.asarray(data, dtype=DTYPE)
    if any(dim < 1 for dim in arr.shape):
        raise ShapeMismatch(f"tensor dimensions must be positive, got shape {arr.shape}")
    return arr


def check_same_shape(op: str, *arrays: Tensor) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ShapeMismatch(f"{op}: shapes do not conform {[a.shape for a in arrays]}")


class Variable:
    """Variable class
    A tensor value tracked by reverse-mode differentiation

    Attributes:
        value: the tensor held by the variable
        requires_grad: whether gradients flow into this variable
        tape: tape that recorded the producing operation (None for leaves)
        tape_id: index of the producing operation on the tape (None for leaves)
    """
    def __init__(self, value: Any, requires_grad: bool = True, name: Optional[str] = None) -> None:
        self.value: Tensor = value if isinstance(value, np.ndarray) and value.dtype == DTYPE else as_tensor(value)
        self.requires_grad = requires_grad
        self.name = name
        self.tape: Optional["Tape"] = None
        self.tape_id: Optional[int] = None
        self._grad: Optional[Tensor] = None

    def __repr__(self) -> str:
        tag = f" name={self.name}" if self.name else ""
        return f"Variable(shape={self.shape}{tag}, tape_id={self.tape_id})"

    @property
    def grad(self) -> Tensor:
        # allocated lazily, intermediates rarely get read
        if self._grad is None:
            self._grad = np.zeros_like(self.value)
        return self._grad

    @grad.setter
    def grad(self, value: Tensor) -> None:
        self._grad = np.asarray(value, dtype=DTYPE).reshape(self.value.shape)

    def accumulate(self, g: Tensor) -> None:
        if self._grad is None:
            self._grad = np.array(g, dtype=DTYPE).reshape(self.value.shape)
        else:
            self._grad += g

    def reset_grad(self) -> None:
        self._grad = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def is_leaf(self) -> bool:
        return self.tape_id is None

    def item(self) -> float:
        return float(self.value.reshape(-1)[0])

    def __float__(self) -> float:
        return self.item()

    # operator sugar, resolved lazily to keep ops importing this module
    def __add__(self, other):
        from gdlkit.autodiff import ops
        return ops.add(self, other)

    def __sub__(self, other):
        from gdlkit.autodiff import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from gdlkit.autodiff import ops
        if isinstance(other, (int, float)):
            return ops.scale(self, float(other))
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from gdlkit.autodiff import ops
        if isinstance(other, (int, float)):
            return ops.scale(self, 1.0 / float(other))
        return ops.div(self, other)

    def __neg__(self):
        from gdlkit.autodiff import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from gdlkit.autodiff import ops
        return ops.matmul(self, other)

    @property
    def T(self):
        from gdlkit.autodiff import ops
        return ops.transpose(self)


def constant(value: Any) -> Variable:
    """Wrap a tensor that never receives gradients"""
    if isinstance(value, Variable):
        return value
    return Variable(value, requires_grad=False)


def zero_grads(variables: Sequence[Variable]) -> None:
    """Reset every gradient to all-zeros

    :param variables: variables to reset
    """
    for var in variables:
        var.reset_grad()
