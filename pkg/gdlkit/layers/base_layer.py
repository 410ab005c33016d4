from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence, Type

import numpy as np

from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable
from gdlkit.exceptions import ShapeMismatch


class Parameter(Variable):
    """Parameter class
    Trainable leaf variable with the fan sizes used by weight initialization

    Attributes:
        role: "weight" or "bias" (biases are zero-initialized)
        fan_in: input fan of the map the parameter belongs to
        fan_out: output fan of the map the parameter belongs to
    """
    def __init__(self, shape: Sequence[int], role: str = "weight",
                 fan_in: Optional[int] = None, fan_out: Optional[int] = None,
                 name: Optional[str] = None) -> None:
        super().__init__(np.zeros(tuple(shape), dtype=DTYPE), requires_grad=True, name=name)
        self.role = role
        self.fan_in = fan_in if fan_in is not None else int(shape[0])
        self.fan_out = fan_out if fan_out is not None else int(shape[-1])

    @property
    def is_bias(self) -> bool:
        return self.role == "bias"


class BaseLayer(ABC):
    """Base class of every parameterized or parameter-free layer

    Subclasses register under a one-byte kind, which is the tag written to
    model checkpoints.
    """
    _registry: Dict[int, Type["BaseLayer"]] = {}
    KIND: int = 0

    in_dim: int
    out_dim: int

    def __init__(self) -> None:
        self.params: List[Parameter] = []

    @abstractmethod
    def forward(self, *args) -> Variable:
        raise NotImplementedError

    def __call__(self, *args) -> Variable:
        return self.forward(*args)

    def parameters(self) -> List[Parameter]:
        return list(self.params)

    @property
    def num_weights(self) -> int:
        return int(sum(p.value.size for p in self.parameters()))

    def tensors(self) -> List[Tensor]:
        """Parameter tensors in checkpoint order"""
        return [p.value for p in self.parameters()]

    def load_tensors(self, arrays: Sequence[Tensor]) -> None:
        params = self.parameters()
        if len(arrays) != len(params):
            raise ShapeMismatch(
                f"{type(self).__name__}: expected {len(params)} tensors, got {len(arrays)}"
            )
        for p, arr in zip(params, arrays):
            arr = np.asarray(arr, dtype=DTYPE)
            if arr.shape != p.shape:
                raise ShapeMismatch(
                    f"{type(self).__name__}: tensor shape {arr.shape} does not match parameter {p.shape}"
                )
            p.value[...] = arr

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.in_dim} -> {self.out_dim})"


layer_registry: Dict[int, Type[BaseLayer]] = BaseLayer._registry


def layer_factory(kind: int):
    """Register a layer class under its checkpoint kind byte"""
    def register(layer_cls: Type[BaseLayer]) -> Type[BaseLayer]:
        if kind in layer_registry and layer_registry[kind] is not layer_cls:
            raise KeyError(f"layer kind {kind} already taken by {layer_registry[kind].__name__}")
        layer_cls.KIND = kind
        layer_registry[kind] = layer_cls
        return layer_cls
    return register
