"""
Dataset containers and train/validation/test splits
"""
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from gdlkit.autodiff.tensor import Tensor
from gdlkit.exceptions import BadFractions, EmptyMask, LabelOutOfRange, ShapeMismatch
from gdlkit.graphs.graph import Graph
from gdlkit.graphs.graph_io import write_edge_list
from gdlkit.training.init import make_rng


def _as_index(idx) -> np.ndarray:
    return np.sort(np.asarray(idx, dtype=np.int64).reshape(-1))


class NodeMask(NamedTuple):
    """Disjoint train/val/test node-index sets (sorted)"""
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    @classmethod
    def of(cls, train: Sequence[int], val: Sequence[int] = (), test: Sequence[int] = ()) -> "NodeMask":
        mask = cls(_as_index(train), _as_index(val), _as_index(test))
        if mask.train.size == 0:
            raise EmptyMask("the training mask is empty")
        seen = np.concatenate([mask.train, mask.val, mask.test])
        if np.unique(seen).size != seen.size:
            raise ShapeMismatch("train, validation and test masks overlap")
        return mask

    def get(self, split: str) -> np.ndarray:
        return getattr(self, split)

    def sizes(self) -> Tuple[int, int, int]:
        return self.train.size, self.val.size, self.test.size


class SplitDataset(NamedTuple):
    """Samples with labels and a train/val/test split

    Attributes:
        samples: N x d float tensor
        labels: N integer labels in [0, C-1]
        split: index sets into the samples
        num_classes: C
        name: dataset id
    """
    samples: Tensor
    labels: np.ndarray
    split: NodeMask
    num_classes: int
    name: str = ""

    def check(self) -> "SplitDataset":
        if self.samples.ndim != 2 or self.samples.shape[0] != self.labels.size:
            raise ShapeMismatch(f"{self.labels.size} labels for samples of shape {self.samples.shape}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise LabelOutOfRange(f"labels outside [0, {self.num_classes - 1}]")
        return self

    @property
    def dim(self) -> int:
        return int(self.samples.shape[1])

    def subset(self, split: str) -> Tuple[Tensor, np.ndarray]:
        idx = self.split.get(split)
        return self.samples[idx], self.labels[idx]


class GraphDataset(NamedTuple):
    """Graph with node features, node labels and a node mask

    Attributes:
        graph: undirected graph, node order = file order
        features: |V| x n feature matrix H0
        labels: |V| integer labels
        mask: train/val/test node sets
        class_names: label index -> name
        name: dataset id
    """
    graph: Graph
    features: Tensor
    labels: np.ndarray
    mask: NodeMask
    class_names: Tuple[str, ...]
    name: str = ""

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def check(self) -> "GraphDataset":
        n = self.graph.n_nodes
        if self.features.shape[0] != n or self.labels.shape != (n,):
            raise ShapeMismatch(
                f"graph has {n} nodes, features {self.features.shape}, labels {self.labels.shape}"
            )
        if n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise LabelOutOfRange(f"node labels outside [0, {self.num_classes - 1}]")
        return self

    def export_edge_list(self, path) -> None:
        """Write the graph in the ``i j`` edge-list text format"""
        write_edge_list(self.graph, path)


def make_splits(n: int, fractions: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0) -> NodeMask:
    """Random disjoint, exhaustive split of range(n)

    Validation and test sizes are rounded; train takes the remainder.

    :raises BadFractions: unless three nonnegative fractions sum to 1
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or min(fractions) < 0 or abs(sum(fractions) - 1.0) > 1e-9:
        raise BadFractions(f"expected three nonnegative fractions summing to 1, got {fractions}")
    n_val = int(round(fractions[1] * n))
    n_test = int(round(fractions[2] * n))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise BadFractions(f"fractions {fractions} leave no training sample out of {n}")
    perm = make_rng(seed).permutation(n)
    return NodeMask.of(perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:])


def per_class_mask(labels: np.ndarray, per_class: int, n_val: int, n_test: int, seed: int) -> NodeMask:
    """per_class training nodes of each class, then n_val and n_test random others"""
    rng = make_rng(seed)
    labels = np.asarray(labels)
    train = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        take = min(per_class, members.size)
        train.extend(rng.choice(members, size=take, replace=False).tolist())
    rest = np.setdiff1d(np.arange(labels.size), np.asarray(train, dtype=np.int64))
    rest = rng.permutation(rest)
    if n_val + n_test > rest.size:
        raise BadFractions(f"{n_val} validation + {n_test} test nodes exceed the {rest.size} left")
    return NodeMask.of(train, rest[:n_val], rest[n_val:n_val + n_test])
