import logging

import numpy as np

from gdlkit.datasets.splits import SplitDataset, make_splits
from gdlkit.training.init import make_rng

logger = logging.getLogger(__name__)


def toy_blobs(n: int = 200, d: int = 4, num_classes: int = 3, seed: int = 0,
              spread: float = 0.5) -> SplitDataset:
    """Gaussian class clusters around random unit-scale centers, split 80/10/10"""
    rng = make_rng(seed)
    centers = rng.normal(size=(num_classes, d))
    labels = np.arange(n) % num_classes
    samples = centers[labels] + spread * rng.normal(size=(n, d))
    logger.debug(f"toy blobs: {n} samples, d={d}, {num_classes} classes")
    return SplitDataset(samples, labels.astype(np.int64), make_splits(n, seed=seed), num_classes, "toy").check()
