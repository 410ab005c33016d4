"""
Training loops

Supervised training samples minibatches of rows; node classification runs a
full-graph forward each step and takes the loss over the training mask only.
"""
import copy
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from gdlkit.autodiff import ops
from gdlkit.autodiff.tape import Tape, backward
from gdlkit.autodiff.tensor import DTYPE, Tensor, Variable
from gdlkit.datasets.splits import NodeMask, SplitDataset
from gdlkit.exceptions import EmptyMask, NonFiniteLoss
from gdlkit.gnn.encoder_decoder import EncoderDecoder, predict_labels
from gdlkit.gnn.gat import GatLayer
from gdlkit.graphs.graph import Graph
from gdlkit.layers.checkpoint import write_checkpoint
from gdlkit.layers.model import Model
from gdlkit.losses.classification import LabeledBatch, cross_entropy_loss
from gdlkit.schemas.hyper_params import OptimizerConfig
from gdlkit.training.init import init_weights, make_rng
from gdlkit.training.metrics import MetricsLog
from gdlkit.training.sgd import TrainState, epoch_batch_sizes, sample_minibatch, sgd_step

logger = logging.getLogger(__name__)

# called as hook(epoch, step) after logged epochs
EpochHook = Callable[[int, int], None]


class TrainResult(NamedTuple):
    state: TrainState
    metrics: MetricsLog
    summary: Dict[str, float]


def evaluate_accuracy(scores: Union[Variable, Tensor], labels: Sequence[int],
                      mask: Optional[Sequence[int]] = None) -> float:
    """Fraction of masked rows whose argmax matches the label

    :param mask: row indices (or a boolean mask); all rows when None
    :raises EmptyMask: if the mask selects nothing
    """
    pred = predict_labels(scores)
    labels = np.asarray(labels)
    if mask is not None:
        mask = np.asarray(mask)
        idx = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
        pred, labels = pred[idx], labels[idx]
    if pred.size == 0:
        raise EmptyMask("accuracy over an empty mask")
    return float(np.mean(pred == labels))


def _check_scores(scores: Variable) -> None:
    if not np.all(np.isfinite(scores.value)):
        raise NonFiniteLoss("class scores became non-finite; the run diverged")


def _check_loss(loss: Variable, step: int) -> float:
    value = loss.item()
    if not np.isfinite(value):
        raise NonFiniteLoss(f"loss became {value} at step {step}")
    return value


def regularized_grad(grad: Tensor, weights: Tensor, cfg: OptimizerConfig) -> Tensor:
    """Loss gradient plus the L2 penalty term weight_decay * w"""
    if cfg.weight_decay:
        grad = grad + cfg.weight_decay * weights
    return grad


"""
Supervised training
"""
def _batch_loss_grad(model: Model, X: Tensor, y: np.ndarray) -> Tuple[float, Tensor, int]:
    model.zero_grads()
    with Tape():
        scores = model.forward(X)
        _check_scores(scores)
        loss = cross_entropy_loss(LabeledBatch.of(scores, y))
    backward(loss)
    correct = int(np.sum(predict_labels(scores) == y))
    return loss.item(), model.grad_view(), correct


class _Replicas:
    """Per-thread model copies for data-parallel minibatch gradients

    Chunk results are reduced in chunk order, so the sum is independent of
    thread scheduling.
    """
    def __init__(self, model: Model, threads: int) -> None:
        self.models = [copy.deepcopy(model) for _ in range(threads)]
        self.pool = ThreadPoolExecutor(max_workers=threads)

    def __call__(self, weights: Tensor, X: Tensor, y: np.ndarray) -> Tuple[float, Tensor, int]:
        chunks = [c for c in np.array_split(np.arange(y.size), len(self.models)) if c.size]
        for m in self.models:
            m.load_weight_view(weights)
        futures = [
            self.pool.submit(_batch_loss_grad, m, X[c], y[c]) for m, c in zip(self.models, chunks)
        ]
        loss, grad, correct = 0.0, np.zeros_like(weights), 0
        for c, fut in zip(chunks, futures):
            c_loss, c_grad, c_correct = fut.result()
            share = c.size / y.size
            loss += share * c_loss
            grad += share * c_grad
            correct += c_correct
        return loss, grad, correct

    def close(self) -> None:
        self.pool.shutdown()


def evaluate_model(model: Model, X: Tensor, y: np.ndarray) -> Tuple[float, float]:
    """(mean cross-entropy, accuracy) over all rows, without recording gradients"""
    scores = ops.lift(model.forward(ops.lift(X)).value)
    _check_scores(scores)
    loss = cross_entropy_loss(LabeledBatch.of(scores, y)).item()
    return loss, evaluate_accuracy(scores, y)


def train_supervised(model: Model, dataset: SplitDataset, cfg: OptimizerConfig,
                     metrics: Optional[MetricsLog] = None,
                     checkpoint_path: Optional[Path] = None,
                     epoch_hook: Optional[EpochHook] = None,
                     init: bool = True) -> TrainResult:
    """Minibatch SGD on the training split

    Epoch loss is the mean of the minibatch mean losses; epoch train accuracy
    counts the minibatch predictions made before each update.
    """
    cfg = cfg.validate()
    metrics = metrics if metrics is not None else MetricsLog()
    if init:
        init_weights(model, cfg.seed)
    X_train, y_train = dataset.subset("train")
    if y_train.size == 0:
        raise EmptyMask("the training split is empty")
    X_val, y_val = dataset.subset("val")
    n = y_train.size
    batch_size = min(cfg.batch_size, n)

    state = TrainState(step=0, weights=model.weight_view(), rng=make_rng(cfg.seed, stream=1))
    replicas = _Replicas(model, cfg.threads) if cfg.threads > 1 else None
    summary: Dict[str, float] = {}

    try:
        for epoch in tqdm(range(cfg.epochs), desc="train", unit="epoch", leave=False):
            lr = cfg.lr_at(epoch)
            losses, correct, seen = [], 0, 0
            for size in epoch_batch_sizes(n, batch_size):
                idx = sample_minibatch(state.rng, n, size)
                Xb, yb = X_train[idx], y_train[idx]
                if replicas is None:
                    loss, grad, n_correct = _batch_loss_grad(model, Xb, yb)
                else:
                    loss, grad, n_correct = replicas(state.weights, Xb, yb)
                if not np.isfinite(loss):
                    raise NonFiniteLoss(f"loss became {loss} at step {state.step}")
                state = sgd_step(state, regularized_grad(grad, state.weights, cfg), lr)
                model.load_weight_view(state.weights)
                losses.append(loss)
                correct += n_correct
                seen += size

            last = epoch == cfg.epochs - 1
            train_loss, train_acc = float(np.mean(losses)), correct / seen
            state = TrainState(state.step, state.weights, train_loss, state.rng)
            if cfg.log_every and ((epoch + 1) % cfg.log_every == 0 or last):
                metrics.append(epoch=epoch + 1, step=state.step, split="train", loss=train_loss, accuracy=train_acc)
                line = f"epoch {epoch + 1:4d} step {state.step:7d} | train loss {train_loss:.4f} acc {train_acc:.4f}"
                if y_val.size:
                    val_loss, val_acc = evaluate_model(model, X_val, y_val)
                    metrics.append(epoch=epoch + 1, step=state.step, split="val", loss=val_loss, accuracy=val_acc)
                    line += f" | val loss {val_loss:.4f} acc {val_acc:.4f}"
                logger.info(line)
                if epoch_hook is not None:
                    epoch_hook(epoch + 1, state.step)
            if checkpoint_path is not None and cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
                write_checkpoint(model, checkpoint_path)
    finally:
        if replicas is not None:
            replicas.close()

    for split in ("train", "val", "test"):
        X, y = dataset.subset(split)
        if y.size:
            summary[f"{split}_loss"], summary[f"{split}_accuracy"] = evaluate_model(model, X, y)
    if checkpoint_path is not None:
        write_checkpoint(model, checkpoint_path)
    return TrainResult(state, metrics, summary)


"""
Semi-supervised node classification
"""
def masked_loss(scores: Variable, labels: np.ndarray, idx: np.ndarray) -> Variable:
    """Mean cross-entropy over the rows listed in idx"""
    if idx.size == 0:
        raise EmptyMask("loss over an empty mask")
    return cross_entropy_loss(LabeledBatch.of(ops.take_rows(scores, idx), labels[idx]))


def attention_row_error(model: EncoderDecoder, g: Graph, H0: Tensor) -> Optional[float]:
    """Largest |sum_u alpha_vu - 1| over attention layers, None without attention"""
    worst = None
    H = ops.lift(np.asarray(H0, dtype=DTYPE))
    for layer in model.encoder:
        if isinstance(layer, GatLayer):
            coeffs = layer.attention(g, H)
            has_msgs = np.zeros(g.n_nodes, dtype=bool)
            has_msgs[coeffs.dst] = True
            err = float(np.max(np.abs(coeffs.row_sums(g.n_nodes)[:, has_msgs] - 1.0)))
            worst = err if worst is None else max(worst, err)
        H = ops.lift(layer.forward(g, H).value)
    return worst


def evaluate_masks(model: EncoderDecoder, g: Graph, H0: Tensor, labels: np.ndarray,
                   mask: NodeMask) -> Dict[str, Tuple[float, float]]:
    """(loss, accuracy) on every nonempty split"""
    scores = ops.lift(model.forward(g, ops.lift(np.asarray(H0, dtype=DTYPE))).value)
    _check_scores(scores)
    out = {}
    for split in ("train", "val", "test"):
        idx = mask.get(split)
        if idx.size:
            out[split] = (masked_loss(scores, labels, idx).item(), evaluate_accuracy(scores, labels, idx))
    return out


def train_node_classifier(model: EncoderDecoder, g: Graph, H0: Tensor, labels: Sequence[int],
                          mask: NodeMask, cfg: OptimizerConfig,
                          metrics: Optional[MetricsLog] = None,
                          checkpoint_path: Optional[Path] = None,
                          epoch_hook: Optional[EpochHook] = None,
                          init: bool = True) -> TrainResult:
    """Full-graph gradient descent with the loss on train-mask nodes only

    Features of every node are visible to the forward pass; only training
    labels reach the loss.
    """
    cfg = cfg.validate()
    metrics = metrics if metrics is not None else MetricsLog()
    labels = np.asarray(labels, dtype=np.int64)
    if mask.train.size == 0:
        raise EmptyMask("the training mask is empty")
    if init:
        init_weights(model, cfg.seed)
    H0 = ops.lift(np.asarray(H0, dtype=DTYPE))
    state = TrainState(step=0, weights=model.weight_view())

    for epoch in tqdm(range(cfg.epochs), desc="train", unit="epoch", leave=False):
        model.zero_grads()
        with Tape():
            scores = model.forward(g, H0)
            _check_scores(scores)
            loss = masked_loss(scores, labels, mask.train)
        loss_value = _check_loss(loss, state.step)
        backward(loss)
        grad = regularized_grad(model.grad_view(), state.weights, cfg)
        state = sgd_step(state, grad, cfg.lr_at(epoch))
        model.load_weight_view(state.weights)
        state = TrainState(state.step, state.weights, loss_value, state.rng)

        last = epoch == cfg.epochs - 1
        if cfg.log_every and ((epoch + 1) % cfg.log_every == 0 or last):
            results = evaluate_masks(model, g, H0.value, labels, mask)
            parts = []
            for split, (split_loss, split_acc) in results.items():
                metrics.append(epoch=epoch + 1, step=state.step, split=split, loss=split_loss, accuracy=split_acc)
                parts.append(f"{split} loss {split_loss:.4f} acc {split_acc:.4f}")
            logger.info(f"epoch {epoch + 1:4d} | " + " | ".join(parts))
            if epoch_hook is not None:
                epoch_hook(epoch + 1, state.step)
        if checkpoint_path is not None and cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
            write_checkpoint(model, checkpoint_path)

    summary: Dict[str, float] = {}
    for split, (split_loss, split_acc) in evaluate_masks(model, g, H0.value, labels, mask).items():
        summary[f"{split}_loss"], summary[f"{split}_accuracy"] = split_loss, split_acc
    row_err = attention_row_error(model, g, H0.value)
    if row_err is not None:
        summary["attention_row_error"] = row_err
        logger.info(f"attention rows sum to 1 within {row_err:.2e}")
    if checkpoint_path is not None:
        write_checkpoint(model, checkpoint_path)
    return TrainResult(state, metrics, summary)
