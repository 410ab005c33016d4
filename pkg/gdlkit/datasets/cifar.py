"""
CIFAR-10 binary batches: 3073-byte records, a label byte followed by
1024 red, 1024 green and 1024 blue pixel bytes
"""
import logging
from pathlib import Path
from typing import Iterable, Tuple, Union

import numpy as np

from gdlkit.autodiff.tensor import DTYPE
from gdlkit.datasets.splits import NodeMask, SplitDataset
from gdlkit.exceptions import DatasetError, LabelOutOfRange, TruncatedFile

logger = logging.getLogger(__name__)

RECORD_BYTES = 3073
PIXELS = 3072
NUM_CLASSES = 10

PathLike = Union[str, Path]


def read_cifar10_batch(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """(N x 3072 uint8 pixels, N labels) of one batch file

    :raises TruncatedFile: if the file size is not a positive multiple of 3073
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"missing CIFAR-10 batch {path}")
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % RECORD_BYTES:
        raise TruncatedFile(f"{path}: {raw.size} bytes is not a whole number of {RECORD_BYTES}-byte records")
    records = raw.reshape(-1, RECORD_BYTES)
    labels = records[:, 0].astype(np.int64)
    if labels.max() >= NUM_CLASSES:
        raise LabelOutOfRange(f"{path}: label {labels.max()} outside [0, {NUM_CLASSES - 1}]")
    return records[:, 1:].copy(), labels


def write_cifar10_batch(path: PathLike, pixels: np.ndarray, labels: np.ndarray) -> None:
    pixels = np.asarray(pixels, dtype=np.uint8).reshape(-1, PIXELS)
    labels = np.asarray(labels, dtype=np.uint8).reshape(-1, 1)
    if labels.shape[0] != pixels.shape[0]:
        raise ValueError(f"{labels.shape[0]} labels for {pixels.shape[0]} images")
    np.concatenate([labels, pixels], axis=1).tofile(str(path))


def load_cifar10(batch_paths: Iterable[PathLike], raw_pixels: bool = False) -> SplitDataset:
    """Concatenate batch files into one dataset

    Files whose name starts with ``test_batch`` form the test split, every
    other file the training split; test files alone are loaded as training
    data. Pixels stay channel-major as stored.
    """
    samples, labels, is_test = [], [], []
    for path in batch_paths:
        pixels, y = read_cifar10_batch(path)
        samples.append(pixels)
        labels.append(y)
        is_test.append(np.full(y.size, Path(path).name.startswith("test_batch")))
        logger.debug(f"CIFAR-10 {path}: {y.size} records")
    if not samples:
        raise DatasetError("no CIFAR-10 batch files given")

    x = np.concatenate(samples).astype(DTYPE)
    if not raw_pixels:
        x /= 255.0
    test = np.concatenate(is_test)
    if test.all():
        test[:] = False
    split = NodeMask.of(np.flatnonzero(~test), (), np.flatnonzero(test))
    logger.info(f"CIFAR-10: {x.shape[0]} records of dimension {x.shape[1]}")
    return SplitDataset(x, np.concatenate(labels), split, NUM_CLASSES, "cifar10").check()
