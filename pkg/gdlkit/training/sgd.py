import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from gdlkit.autodiff.tensor import DTYPE, Tensor
from gdlkit.exceptions import BatchTooLarge, NonFiniteGradient, ShapeMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainState:
    """Optimizer state between steps

    Attributes:
        step: number of updates applied so far
        weights: flat weight vector w_t
        running_loss: last recorded loss
        rng: minibatch sampler
    """
    step: int
    weights: Tensor
    running_loss: float = float("nan")
    rng: Optional[np.random.Generator] = None


def sgd_step(state: TrainState, grad: Tensor, lr: float) -> TrainState:
    """w_{t+1} = w_t - lr * grad

    :raises NonFiniteGradient: if grad holds NaN or infinite entries
    """
    grad = np.asarray(grad, dtype=DTYPE)
    if grad.shape != state.weights.shape:
        raise ShapeMismatch(f"gradient shape {grad.shape} differs from weights {state.weights.shape}")
    if not np.all(np.isfinite(grad)):
        bad = int(np.count_nonzero(~np.isfinite(grad)))
        raise NonFiniteGradient(
            f"step {state.step}: {bad} non-finite gradient entries (|w| max {np.abs(state.weights).max():.3g})"
        )
    return replace(state, step=state.step + 1, weights=state.weights - lr * grad)


def sample_minibatch(rng: np.random.Generator, n: int, batch_size: int) -> np.ndarray:
    """batch_size distinct indices of [0, n), drawn uniformly

    Batches are independent, so an index may recur across steps.

    :raises BatchTooLarge: if batch_size > n
    """
    if batch_size > n:
        raise BatchTooLarge(f"batch of {batch_size} from {n} samples")
    if batch_size < 1:
        raise BatchTooLarge(f"batch size must be positive, got {batch_size}")
    return rng.choice(n, size=batch_size, replace=False)


def epochs_to_steps(n: int, batch_size: int) -> int:
    """ceil(n / batch_size); the last batch of an epoch may be short"""
    if batch_size < 1:
        raise BatchTooLarge(f"batch size must be positive, got {batch_size}")
    return -(-n // batch_size)


def epoch_batch_sizes(n: int, batch_size: int):
    """Batch size of every step in one epoch"""
    steps = epochs_to_steps(n, batch_size)
    sizes = [batch_size] * steps
    if steps:
        sizes[-1] = n - (steps - 1) * batch_size
    return sizes
