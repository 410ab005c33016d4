"""
Zachary karate club, embedded

34 members, 78 friendship edges (0-based node ids) and the four-community
labelling used for semi-supervised node classification benchmarks.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from gdlkit.datasets.splits import GraphDataset, NodeMask
from gdlkit.exceptions import DatasetError
from gdlkit.graphs.graph import Graph
from gdlkit.training.init import make_rng

logger = logging.getLogger(__name__)

NUM_NODES = 34

KARATE_EDGES = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8),
    (0, 10), (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31),
    (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30),
    (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13),
    (4, 6), (4, 10),
    (5, 6), (5, 10), (5, 16),
    (6, 16),
    (8, 30), (8, 32), (8, 33),
    (9, 33),
    (13, 33),
    (14, 32), (14, 33),
    (15, 32), (15, 33),
    (18, 32), (18, 33),
    (19, 33),
    (20, 32), (20, 33),
    (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31),
    (25, 31),
    (26, 29), (26, 33),
    (27, 33),
    (28, 31), (28, 33),
    (29, 32), (29, 33),
    (30, 32), (30, 33),
    (31, 32), (31, 33),
    (32, 33),
)

KARATE_LABELS = (
    1, 1, 1, 1, 3, 3, 3, 1, 0, 1, 3, 1, 1, 1, 0, 0, 3,
    1, 0, 1, 0, 1, 0, 0, 2, 2, 0, 0, 2, 0, 0, 2, 0, 0,
)

CLASS_NAMES = ("community_0", "community_1", "community_2", "community_3")


def karate_club(seed: int = 0, train_nodes: Optional[Sequence[int]] = None) -> GraphDataset:
    """Karate club graph with identity features

    The training mask holds one node per community, drawn with ``seed``
    unless ``train_nodes`` is given; every other node is validation and
    there is no test split.
    """
    labels = np.asarray(KARATE_LABELS, dtype=np.int64)
    if train_nodes is None:
        rng = make_rng(seed)
        train = [int(rng.choice(np.flatnonzero(labels == c))) for c in range(len(CLASS_NAMES))]
    else:
        train = [int(v) for v in train_nodes]
        if any(not 0 <= v < NUM_NODES for v in train):
            raise DatasetError(f"training nodes {train} outside [0, {NUM_NODES})")
    val = np.setdiff1d(np.arange(NUM_NODES), train)
    dataset = GraphDataset(
        graph=Graph(NUM_NODES, KARATE_EDGES),
        features=np.eye(NUM_NODES),
        labels=labels,
        mask=NodeMask.of(train, val),
        class_names=CLASS_NAMES,
        name="karate",
    ).check()
    logger.debug(f"karate club training nodes {sorted(train)}")
    return dataset
