"""
Elementwise activation functions
"""
from enum import Enum
from typing import NamedTuple, Union

import numpy as np

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import Tensor, Variable
from gdlkit.exceptions import ArchitectureError, ZeroParameter
from gdlkit.global_vars import DEFAULT_LEAKY_SLOPE


class ActivationKind(Enum):
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"
    ELU = "elu"
    TANH = "tanh"
    IDENTITY = "identity"


class Activation(NamedTuple):
    """Activation record; slope only matters for LEAKY_RELU"""
    kind: ActivationKind
    slope: float = DEFAULT_LEAKY_SLOPE

    @classmethod
    def parse(cls, text: str) -> "Activation":
        """Parse "relu", "tanh", "leaky_relu" or "leaky_relu:0.1" """
        name, _, arg = text.strip().lower().partition(":")
        try:
            kind = ActivationKind(name)
        except ValueError:
            raise ArchitectureError(
                f"unknown activation {text!r}, choose from {[k.value for k in ActivationKind]}"
            )
        slope = float(arg) if arg else DEFAULT_LEAKY_SLOPE
        if kind is ActivationKind.LEAKY_RELU and not 0.0 < slope < 1.0:
            raise ArchitectureError(f"LeakyRELU slope must lie in (0, 1), got {slope}")
        return cls(kind, slope)

    def __str__(self) -> str:
        if self.kind is ActivationKind.LEAKY_RELU and self.slope != DEFAULT_LEAKY_SLOPE:
            return f"{self.kind.value}:{self.slope}"
        return self.kind.value

    def __call__(self, z: Union[Variable, Tensor]) -> Variable:
        return activate(self, z)


RELU = Activation(ActivationKind.RELU)
LEAKY_RELU = Activation(ActivationKind.LEAKY_RELU)
ELU = Activation(ActivationKind.ELU)
TANH = Activation(ActivationKind.TANH)
IDENTITY = Activation(ActivationKind.IDENTITY)


def relu(z: Union[Variable, Tensor]) -> Variable:
    # gradient 0 at the kink
    return ops.unary(z, lambda x: np.maximum(x, 0.0), lambda x, y: (x > 0).astype(x.dtype), "relu")


def leaky_relu(z: Union[Variable, Tensor], slope: float = DEFAULT_LEAKY_SLOPE) -> Variable:
    return ops.unary(
        z,
        lambda x: np.where(x > 0, x, slope * x),
        lambda x, y: np.where(x > 0, 1.0, slope),
        "leaky_relu",
    )


def elu(z: Union[Variable, Tensor]) -> Variable:
    return ops.unary(
        z,
        lambda x: np.where(x > 0, x, np.expm1(np.minimum(x, 0.0))),
        lambda x, y: np.where(x > 0, 1.0, y + 1.0),
        "elu",
    )


def activate(kind: Activation, z: Union[Variable, Tensor]) -> Variable:
    """Apply an activation elementwise

    :param kind: Activation record (or a bare ActivationKind)
    :param z: input of any shape
    """
    if isinstance(kind, ActivationKind):
        kind = Activation(kind)
    if kind.kind is ActivationKind.RELU:
        return relu(z)
    if kind.kind is ActivationKind.LEAKY_RELU:
        return leaky_relu(z, kind.slope)
    if kind.kind is ActivationKind.ELU:
        return elu(z)
    if kind.kind is ActivationKind.TANH:
        return ops.tanh(z)
    return ops.lift(z)


def spike_function(a: float, x: float) -> float:
    """RELU(x - a) - 2 RELU(x) + RELU(x + a)

    A triangular bump of height |a| supported on (-|a|, |a|).

    :raises ZeroParameter: if a == 0
    """
    if a == 0:
        raise ZeroParameter("spike function needs a nonzero width parameter")
    r = lambda t: max(t, 0.0)
    return r(x - a) - 2.0 * r(x) + r(x + a)
