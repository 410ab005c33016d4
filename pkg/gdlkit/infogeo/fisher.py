"""
Fisher information of a classifier at a single input

With p = softmax(s(x, w)) and g_i = grad_w log p_i, the Fisher matrix is
F = sum_i p_i g_i g_i^T = J^T J for the factor J = diag(sqrt(p)) G. The C x P
matrix G comes from C backward passes over one recorded forward pass, so F is
exact over the classes. Dense F is only formed for small models; the spectrum
always comes from the C x C Gram matrix J J^T.
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, NamedTuple, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg
from typing_extensions import TypedDict

from gdlkit.autodiff import ops
from gdlkit.autodiff.tape import Tape, backward
from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable
from gdlkit.exceptions import NonFiniteProbability, ShapeMismatch
from gdlkit.global_vars import (
    HESSIAN_FD_STEP,
    MAX_DENSE_FISHER_PARAMS,
    MAX_HESSIAN_PARAMS,
    RANK_RTOL,
)
from gdlkit.graphs.graph import Graph
from gdlkit.layers.base_layer import Parameter

logger = logging.getLogger(__name__)


class ClassifierModel(Protocol):
    def parameters(self) -> List[Parameter]:
        ...

    def weight_view(self) -> Tensor:
        ...

    def load_weight_view(self, w: Tensor) -> None:
        ...

    def zero_grads(self) -> None:
        ...

    def grad_view(self) -> Tensor:
        ...

    def forward(self, x) -> Variable:
        ...


class NodeScoreModel:
    """Adapter exposing one node of a graph model as a classifier of node ids"""
    def __init__(self, model, g: Graph, H0: Tensor) -> None:
        self.model, self.g, self.H0 = model, g, np.asarray(H0, dtype=DTYPE)

    def __getattr__(self, name):
        return getattr(self.model, name)

    def forward(self, node) -> Variable:
        scores = self.model.forward(self.g, self.H0)
        return ops.take_rows(scores, [int(node)])


class FisherResiduals(TypedDict, total=False):
    """Max-abs residuals of the Fisher identities; None when a check was skipped"""
    expectation: float
    covariance: float
    hessian: Optional[float]
    hessian_sum: Optional[float]


class InfoLoss(NamedTuple):
    """Information loss I_i = -log p_i per class"""
    values: Tensor


@dataclass
class FisherReport:
    """FisherReport class

    Attributes:
        F: dense Fisher matrix, None above MAX_DENSE_FISHER_PARAMS parameters
        singular_values: descending, at most C (the remaining ones are zero)
        numerical_rank: singular values above RANK_RTOL * sigma_max
        probs: class probabilities p
        residuals: expectation / covariance / hessian / hessian_sum identity residuals
            (hessian entries are None when skipped)
    """
    F: Optional[Tensor]
    singular_values: Tensor
    numerical_rank: int
    probs: Tensor
    num_params: int
    residuals: FisherResiduals = field(default_factory=FisherResiduals)

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    @property
    def num_classes(self) -> int:
        return int(self.probs.size)


@contextmanager
def weights_loaded(model: ClassifierModel, w: Optional[Tensor]) -> Iterator[None]:
    """Temporarily load w (None keeps the current weights); restores on exit"""
    saved = model.weight_view().copy()
    if w is not None:
        model.load_weight_view(w)
    try:
        yield
    finally:
        model.load_weight_view(saved)
        model.zero_grads()


def _score_vector(model: ClassifierModel, x) -> Variable:
    s = model.forward(x)
    if s.value.size != max(s.shape) or s.ndim > 2:
        raise ShapeMismatch(f"expected scores for one input, got shape {s.shape}")
    return ops.reshape(s, (s.value.size,))


def _check_probs(p: Tensor) -> None:
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise NonFiniteProbability(f"class probabilities must be finite and positive, got min {np.min(p):.3g}")


def class_probabilities(model: ClassifierModel, x, w: Optional[Tensor] = None) -> Tensor:
    with weights_loaded(model, w):
        s = _score_vector(model, x).value
    shifted = s - s.max()
    e = np.exp(shifted)
    return e / e.sum()


def _log_prob_gradients(model: ClassifierModel, x) -> Tuple[Tensor, Tensor]:
    """(p, G) at the currently loaded weights, G[i] = grad_w log p_i"""
    with Tape():
        logp = ops.log_softmax(_score_vector(model, x))
    p = np.exp(logp.value)
    _check_probs(p)
    C = p.size
    G = np.zeros((C, model.num_weights), dtype=DTYPE)
    for i in range(C):
        model.zero_grads()
        backward(ops.take(logp, [i]))
        G[i] = model.grad_view()
    model.zero_grads()
    return p, G


def log_prob_gradients(model: ClassifierModel, x, w: Optional[Tensor] = None) -> Tuple[Tensor, Tensor]:
    """Class probabilities and the C x P matrix of grad_w log p_i"""
    with weights_loaded(model, w):
        return _log_prob_gradients(model, x)


def spectrum_from_factor(J: Tensor) -> Tensor:
    """Descending eigenvalues of J^T J via the smaller Gram matrix J J^T"""
    gram = J @ J.T
    vals = scipy.linalg.eigvalsh((gram + gram.T) / 2.0)
    return np.clip(vals[::-1], 0.0, None)


def numerical_rank(singular_values: Tensor, rtol: float = RANK_RTOL) -> int:
    if singular_values.size == 0 or singular_values[0] <= 0:
        return 0
    return int(np.count_nonzero(singular_values > rtol * singular_values[0]))


def _hessian_residuals(model: ClassifierModel, x, w: Tensor, p: Tensor, F: Tensor,
                       h: float = HESSIAN_FD_STEP) -> Tuple[float, float]:
    """max|F - sum_i p_i H(-log p_i)| and max|sum_i H(p_i)|, Hessians by central
    differences of autodiff gradients
    """
    P = w.size
    expected_hessian = np.zeros((P, P), dtype=DTYPE)
    prob_hessian_sum = np.zeros((P, P), dtype=DTYPE)
    for k in range(P):
        cols = []
        for sign in (1.0, -1.0):
            wk = w.copy()
            wk[k] += sign * h
            model.load_weight_view(wk)
            pk, Gk = _log_prob_gradients(model, x)
            # grad of -log p_i, and grad of p_i = p_i grad log p_i
            cols.append((-Gk, (pk[:, None] * Gk).sum(axis=0)))
        d_info = (cols[0][0] - cols[1][0]) / (2.0 * h)
        expected_hessian[:, k] = p @ d_info
        prob_hessian_sum[:, k] = (cols[0][1] - cols[1][1]) / (2.0 * h)
    model.load_weight_view(w)
    expected_hessian = (expected_hessian + expected_hessian.T) / 2.0
    return float(np.max(np.abs(F - expected_hessian))), float(np.max(np.abs(prob_hessian_sum)))


def fisher_matrix(model: ClassifierModel, x, w: Optional[Tensor] = None,
                  hessian: bool = True) -> FisherReport:
    """Fisher matrix at (x, w) with its spectrum and identity residuals

    :param w: flat weights to evaluate at (current weights when None)
    :param hessian: also run the finite-difference Hessian identity (small models only)
    :raises NonFiniteProbability: if some class probability is 0 or not finite
    """
    with weights_loaded(model, w):
        w0 = model.weight_view().copy()
        p, G = _log_prob_gradients(model, x)
        P = G.shape[1]
        J = np.sqrt(p)[:, None] * G
        sv = spectrum_from_factor(J)
        m = p @ G
        residuals = FisherResiduals(
            expectation=float(np.max(np.abs(m))) if P else 0.0,
            hessian=None,
            hessian_sum=None,
        )
        F = None
        if P <= MAX_DENSE_FISHER_PARAMS:
            F = J.T @ J
            F = (F + F.T) / 2.0
            centered = G - m
            cov = centered.T @ (p[:, None] * centered)
            residuals["covariance"] = float(np.max(np.abs(F - cov))) if P else 0.0
            if hessian and P <= MAX_HESSIAN_PARAMS:
                residuals["hessian"], residuals["hessian_sum"] = _hessian_residuals(model, x, w0, p, F)
            elif hessian:
                logger.debug(f"Hessian identity skipped for {P} parameters (limit {MAX_HESSIAN_PARAMS})")
        else:
            # F - Cov = m m^T exactly
            residuals["covariance"] = float(np.max(np.abs(m)) ** 2)

    return FisherReport(F=F, singular_values=sv, numerical_rank=numerical_rank(sv),
                        probs=p, num_params=P, residuals=residuals)


def fisher_rank(model: ClassifierModel, x, w: Optional[Tensor] = None) -> Tuple[int, float]:
    """(numerical rank, sigma_max) from the Gram spectrum only"""
    p, G = log_prob_gradients(model, x, w)
    sv = spectrum_from_factor(np.sqrt(p)[:, None] * G)
    return numerical_rank(sv), float(sv[0]) if sv.size else 0.0


def expectation_of_score_gradient(model: ClassifierModel, x, w: Optional[Tensor] = None) -> Tensor:
    """E_p[grad_w I] = -sum_i p_i grad_w log p_i, identically zero"""
    p, G = log_prob_gradients(model, x, w)
    return -(p @ G)


def fisher_as_covariance(model: ClassifierModel, x, w: Optional[Tensor] = None) -> float:
    """max|F - Cov_p(grad_w I)|"""
    return fisher_matrix(model, x, w, hessian=False).residuals["covariance"]


def fisher_as_expected_hessian(model: ClassifierModel, x, w: Optional[Tensor] = None) -> Optional[float]:
    """max|F - E_p[H(I)]|, None when the model is too large for the check"""
    return fisher_matrix(model, x, w, hessian=True).residuals["hessian"]


def information_loss(model: ClassifierModel, x, w: Optional[Tensor] = None) -> InfoLoss:
    p = class_probabilities(model, x, w)
    _check_probs(p)
    return InfoLoss(-np.log(p))


def kl_quadratic_check(model: ClassifierModel, x, w: Optional[Tensor], dw: Tensor) -> Tuple[float, float]:
    """(KL(p(w + dw) || p(w)), 1/2 dw^T F dw) with F at w"""
    with weights_loaded(model, w):
        w0 = model.weight_view().copy()
        p0, G = _log_prob_gradients(model, x)
        dw = np.asarray(dw, dtype=DTYPE).reshape(-1)
        if dw.size != w0.size:
            raise ShapeMismatch(f"perturbation has {dw.size} entries, model has {w0.size}")
        p1 = class_probabilities(model, x, w0 + dw)
    _check_probs(p1)
    kl = float(np.sum(p1 * (np.log(p1) - np.log(p0))))
    quad = 0.5 * float(np.sum(p0 * (G @ dw) ** 2))
    return kl, quad


def summed_fisher(model: ClassifierModel, X: Sequence, w: Optional[Tensor] = None) -> FisherReport:
    """F(w) = sum over inputs of F(x, w)"""
    factors, probs = [], []
    with weights_loaded(model, w):
        for x in X:
            p, G = _log_prob_gradients(model, x)
            factors.append(np.sqrt(p)[:, None] * G)
            probs.append(p)
    J = np.concatenate(factors, axis=0)
    P = J.shape[1]
    F = J.T @ J if P <= MAX_DENSE_FISHER_PARAMS else None
    sv = spectrum_from_factor(J)
    return FisherReport(F=F, singular_values=sv, numerical_rank=numerical_rank(sv),
                        probs=np.mean(probs, axis=0), num_params=P)


def write_fisher_report(report: FisherReport, path: Union[str, Path]) -> None:
    """CSV of kind,index,value rows"""
    rows = [("singular_value", k, float(v)) for k, v in enumerate(report.singular_values)]
    rows += [("probability", k, float(v)) for k, v in enumerate(report.probs)]
    rows += [("residual_" + name, 0, np.nan if v is None else float(v)) for name, v in sorted(report.residuals.items())]
    rows += [("numerical_rank", 0, float(report.numerical_rank)), ("num_params", 0, float(report.num_params))]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=["kind", "index", "value"]).to_csv(path, index=False)
