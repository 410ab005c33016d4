"""
Central finite-difference oracle for reverse-mode gradients
"""
import logging
from typing import Callable, Sequence

import numpy as np

from gdlkit.autodiff.tape import Tape, backward
from gdlkit.autodiff.tensor import Tensor, Variable, zero_grads
from gdlkit.global_vars import FD_STEP, GRADCHECK_RTOL

logger = logging.getLogger(__name__)


def numerical_gradient(f: Callable[[], float], x: Tensor, eps: float = FD_STEP) -> Tensor:
    """Central differences of a scalar function with respect to the array x

    x is perturbed in place and restored after every probe, so f should read
    x (or a Variable wrapping it) at call time.

    :param f: no-argument scalar function
    :param x: array to probe
    :param eps: perturbation step
    """
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_g = grad.reshape(-1)
    for k in range(flat_x.size):
        orig = flat_x[k]
        flat_x[k] = orig + eps
        f_plus = float(f())
        flat_x[k] = orig - eps
        f_minus = float(f())
        flat_x[k] = orig
        flat_g[k] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def relative_error(analytic: Tensor, numeric: Tensor) -> float:
    """max |a - n| / max(1, |n|), elementwise"""
    denom = np.maximum(1.0, np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def check_gradients(f: Callable[..., Variable], inputs: Sequence[Variable],
                    rtol: float = GRADCHECK_RTOL, eps: float = FD_STEP) -> bool:
    """Compare autodiff gradients of f(*inputs) against central differences

    :param f: function building a scalar Variable from the inputs
    :param inputs: leaf variables, perturbed in place during probing
    :return: True when every input agrees within rtol
    """
    zero_grads(inputs)
    with Tape():
        root = f(*inputs)
    backward(root)
    analytic = [v.grad.copy() for v in inputs]

    def probe() -> float:
        return f(*inputs).item()

    ok = True
    for var, grad in zip(inputs, analytic):
        numeric = numerical_gradient(probe, var.value, eps)
        err = relative_error(grad, numeric)
        if err > rtol:
            logger.debug(f"gradient check failed for {var!r}: rel. error {err:.3e} > {rtol:.1e}")
            ok = False
    zero_grads(inputs)
    return ok
