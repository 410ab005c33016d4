import logging
from typing import Protocol, List

import numpy as np

from gdlkit.layers.base_layer import Parameter

logger = logging.getLogger(__name__)


class HasParameters(Protocol):
    def parameters(self) -> List[Parameter]:
        ...


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator; distinct streams of one seed are independent"""
    if stream == 0:
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64([seed, stream]))


def xavier_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_weights(model: HasParameters, seed: int) -> None:
    """Xavier-uniform weights, zero biases, in parameter order

    Same seed, same model shape: bit-identical weights.
    """
    rng = make_rng(seed)
    for p in model.parameters():
        if p.is_bias:
            p.value[...] = 0.0
        else:
            bound = xavier_bound(p.fan_in, p.fan_out)
            p.value[...] = rng.uniform(-bound, bound, size=p.shape)
        p.reset_grad()
    logger.debug(f"initialized {len(model.parameters())} parameter tensors with seed {seed}")
