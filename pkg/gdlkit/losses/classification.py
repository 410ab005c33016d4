"""
Class probabilities, cross-entropy, entropy and KL divergence

Entropy follows the sign convention H(q) = sum_i q_i log q_i (so H(q) <= 0),
which makes KL(q||p) = H(q) + H(q, p) hold as written.
"""
from typing import NamedTuple, Sequence, Union

import numpy as np

from gdlkit.autodiff import ops
from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable
from gdlkit.exceptions import DomainError, LabelOutOfRange, NonFinite, ShapeMismatch, SupportMismatch
from gdlkit.global_vars import DISTRIBUTION_TOL


class ClassDistribution(NamedTuple):
    """Probability vector over classes 0..C-1"""
    probs: Tensor

    @classmethod
    def of(cls, probs: Union[Tensor, Sequence[float]], tol: float = DISTRIBUTION_TOL) -> "ClassDistribution":
        probs = np.asarray(probs, dtype=DTYPE)
        if probs.ndim != 1 or probs.size == 0:
            raise ShapeMismatch(f"a class distribution is a nonempty vector, got shape {probs.shape}")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > tol:
            raise DomainError(f"not a probability vector (min {probs.min():.3g}, sum {probs.sum():.12g})")
        return cls(probs)

    @property
    def num_classes(self) -> int:
        return int(self.probs.size)


class LabeledBatch(NamedTuple):
    """Scores (N x C, array or Variable) with one integer label per row"""
    scores: Union[Variable, Tensor]
    labels: np.ndarray

    @classmethod
    def of(cls, scores: Union[Variable, Tensor], labels: Sequence[int]) -> "LabeledBatch":
        scores = ops.lift(scores)
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if scores.ndim != 2 or scores.shape[0] != labels.size:
            raise ShapeMismatch(f"{labels.size} labels for scores of shape {scores.shape}")
        if labels.size and (labels.min() < 0 or labels.max() >= scores.shape[1]):
            raise LabelOutOfRange(
                f"labels must lie in [0, {scores.shape[1] - 1}], got range [{labels.min()}, {labels.max()}]"
            )
        return cls(scores, labels)


def _check_finite(z: Tensor) -> None:
    if not np.all(np.isfinite(z)):
        raise NonFinite("scores contain NaN or infinite entries")


def softmax_rows(scores: Tensor) -> Tensor:
    """Row-wise softmax of a score matrix (or a single vector)"""
    scores = np.asarray(scores, dtype=DTYPE)
    _check_finite(scores)
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(z: Union[Tensor, Sequence[float]]) -> ClassDistribution:
    """Normalized exponentials, computed after subtracting the max

    :raises NonFinite: on NaN or infinite input
    """
    z = np.asarray(z, dtype=DTYPE)
    if z.ndim != 1:
        raise ShapeMismatch(f"softmax takes a score vector, got shape {z.shape}")
    return ClassDistribution(softmax_rows(z))


def cross_entropy_loss(batch: LabeledBatch) -> Variable:
    """Mean over the batch of -log softmax(scores)[label], via log-sum-exp

    Differentiable in the scores when they are a Variable.
    """
    batch = LabeledBatch.of(batch.scores, batch.labels)
    _check_finite(batch.scores.value)
    logp = ops.log_softmax(batch.scores, axis=1)
    return ops.neg(ops.mean(ops.pick(logp, batch.labels)))


def _xlogy(x: Tensor, y: Tensor) -> Tensor:
    # 0 log 0 = 0
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(y[pos])
    return out


def _probs(q) -> Tensor:
    return q.probs if isinstance(q, ClassDistribution) else ClassDistribution.of(q).probs


def shannon_entropy(q: ClassDistribution) -> float:
    """sum_i q_i log q_i (nonpositive; zero for mass distributions)"""
    q = _probs(q)
    return float(_xlogy(q, q).sum())


def _check_support(q: Tensor, p: Tensor) -> None:
    if q.shape != p.shape:
        raise ShapeMismatch(f"distributions over {q.size} and {p.size} classes")
    if np.any((q > 0) & (p <= 0)):
        raise SupportMismatch("p vanishes where q has mass")


def cross_entropy(q: ClassDistribution, p: ClassDistribution) -> float:
    """H(q, p) = -sum_i q_i log p_i"""
    q, p = _probs(q), _probs(p)
    _check_support(q, p)
    return float(-_xlogy(q, p).sum())


def kl_divergence(q: ClassDistribution, p: ClassDistribution) -> float:
    """KL(q||p) = sum_i q_i log(q_i / p_i)

    :raises SupportMismatch: if q_i > 0 where p_i == 0
    """
    q, p = _probs(q), _probs(p)
    _check_support(q, p)
    pos = q > 0
    return float(np.sum(q[pos] * (np.log(q[pos]) - np.log(p[pos]))))


def onehot(label: int, num_classes: int) -> ClassDistribution:
    """Mass distribution q(x) at the given label"""
    if not 0 <= label < num_classes:
        raise LabelOutOfRange(f"label {label} outside [0, {num_classes - 1}]")
    q = np.zeros(num_classes, dtype=DTYPE)
    q[label] = 1.0
    return ClassDistribution(q)
