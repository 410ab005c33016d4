"""
Regression losses

Per-coordinate losses are summed over coordinates and averaged over the N
samples (rows). A 1-D prediction is a single sample.
"""
from enum import Enum
from typing import Union

import numpy as np

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import Tensor, Variable
from gdlkit.exceptions import ShapeMismatch
from gdlkit.global_vars import DEFAULT_HUBER_DELTA

LOG2 = float(np.log(2.0))


class RegressionKind(Enum):
    MSE = "mse"
    RMSE = "rmse"
    MAE = "mae"
    HUBER = "huber"
    LOGCOSH = "logcosh"


def huber(r: Variable, delta: float = DEFAULT_HUBER_DELTA) -> Variable:
    """1/2 r^2 for |r| <= delta, else delta (|r| - delta / 2)"""
    return ops.unary(
        r,
        lambda x: np.where(np.abs(x) <= delta, 0.5 * x * x, delta * (np.abs(x) - 0.5 * delta)),
        lambda x, y: np.clip(x, -delta, delta),
        "huber",
    )


def logcosh(r: Variable) -> Variable:
    # log cosh x = |x| + log1p(exp(-2|x|)) - log 2, overflow free
    return ops.unary(
        r,
        lambda x: np.abs(x) + np.log1p(np.exp(-2.0 * np.abs(x))) - LOG2,
        lambda x, y: np.tanh(x),
        "logcosh",
    )


def regression_loss(kind: Union[RegressionKind, str], pred: Union[Variable, Tensor],
                    target: Union[Variable, Tensor], delta: float = DEFAULT_HUBER_DELTA) -> Variable:
    """MSE, RMSE, MAE, Huber(delta) or LogCosh between predictions and targets

    :raises ShapeMismatch: if pred and target shapes differ
    """
    kind = RegressionKind(kind)
    pred, target = ops.lift(pred), ops.lift(target)
    if pred.shape != target.shape:
        raise ShapeMismatch(f"prediction shape {pred.shape} differs from target {target.shape}")
    n_samples = pred.shape[0] if pred.ndim == 2 else 1
    r = ops.sub(pred, target)

    if kind in (RegressionKind.MSE, RegressionKind.RMSE):
        per_coord = ops.mul(r, r)
    elif kind is RegressionKind.MAE:
        per_coord = ops.absolute(r)
    elif kind is RegressionKind.HUBER:
        per_coord = huber(r, delta)
    else:
        per_coord = logcosh(r)

    loss = ops.scale(ops.sum(per_coord), 1.0 / n_samples)
    if kind is RegressionKind.RMSE:
        loss = ops.sqrt(loss)
    return loss
