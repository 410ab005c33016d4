"""
MNIST reader and writer for the IDX binary format

Header fields are big-endian 32 bit integers, pixels and labels unsigned bytes.
Files ending in ``.gz`` are read and written through gzip.
"""
import gzip
import logging
import struct
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from gdlkit.autodiff.tensor import DTYPE
from gdlkit.datasets.splits import NodeMask, SplitDataset
from gdlkit.exceptions import BadMagic, CountMismatch, DatasetError, TruncatedFile
from gdlkit.training.init import make_rng

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049
NUM_CLASSES = 10

PathLike = Union[str, Path]

# (images, labels) file stems as shipped
TRAIN_FILES = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte")
TEST_FILES = ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")


def _open(path: PathLike, mode: str):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode)
    return open(path, mode)


def _read_bytes(path: PathLike) -> bytes:
    try:
        with _open(path, "rb") as f:
            return f.read()
    except FileNotFoundError:
        raise DatasetError(f"missing IDX file {path}")


def _header(raw: bytes, path: PathLike, magic: int, n_fields: int) -> Tuple[int, ...]:
    size = 4 * (n_fields + 1)
    if len(raw) < size:
        raise TruncatedFile(f"{path}: {len(raw)} bytes cannot hold an IDX header")
    fields = struct.unpack(f">{n_fields + 1}I", raw[:size])
    if fields[0] != magic:
        raise BadMagic(f"{path}: magic number {fields[0]}, expected {magic}")
    return fields[1:]


def read_idx_images(path: PathLike) -> np.ndarray:
    """N x rows x cols uint8 array

    :raises BadMagic: if the magic number is not 2051
    :raises TruncatedFile: if fewer pixel bytes follow the header than it declares
    """
    raw = _read_bytes(path)
    n, rows, cols = _header(raw, path, IMAGES_MAGIC, 3)
    expected = n * rows * cols
    body = raw[16:]
    if len(body) < expected:
        raise TruncatedFile(f"{path}: {len(body)} pixel bytes for {n} images of {rows}x{cols}")
    return np.frombuffer(body, dtype=np.uint8, count=expected).reshape(n, rows, cols)


def read_idx_labels(path: PathLike) -> np.ndarray:
    raw = _read_bytes(path)
    (n,) = _header(raw, path, LABELS_MAGIC, 1)
    body = raw[8:]
    if len(body) < n:
        raise TruncatedFile(f"{path}: {len(body)} label bytes, header declares {n}")
    return np.frombuffer(body, dtype=np.uint8, count=n).copy()


def write_idx_images(path: PathLike, images: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError(f"expected N x rows x cols images, got shape {images.shape}")
    with _open(path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGES_MAGIC, *images.shape))
        f.write(images.tobytes())


def write_idx_labels(path: PathLike, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8).reshape(-1)
    with _open(path, "wb") as f:
        f.write(struct.pack(">II", LABELS_MAGIC, labels.size))
        f.write(labels.tobytes())


def read_mnist_arrays(images_path: PathLike, labels_path: PathLike, raw_pixels: bool = False):
    """Flattened N x 784 float samples and N labels

    :raises CountMismatch: if the image and label files hold different counts
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.size:
        raise CountMismatch(f"{images.shape[0]} images in {images_path}, {labels.size} labels in {labels_path}")
    samples = images.reshape(images.shape[0], -1).astype(DTYPE)
    if not raw_pixels:
        samples /= 255.0
    return samples, labels.astype(np.int64)


def load_mnist(images_path: PathLike, labels_path: PathLike, raw_pixels: bool = False) -> SplitDataset:
    """One shipped IDX pair as a dataset whose training split is every sample"""
    samples, labels = read_mnist_arrays(images_path, labels_path, raw_pixels)
    logger.info(f"MNIST {Path(images_path).name}: {samples.shape[0]} samples of dimension {samples.shape[1]}")
    return SplitDataset(samples, labels, NodeMask.of(np.arange(labels.size)), NUM_CLASSES, "mnist").check()


def _find(data_dir: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx")):
        candidate = data_dir / name
        if candidate.exists():
            return candidate
    raise DatasetError(f"no {stem}[.gz] under {data_dir}")


def load_mnist_dir(
    data_dir: PathLike,
    val_fraction: float = 0.1,
    seed: int = 0,
    raw_pixels: bool = False,
    limit: Optional[int] = None,
) -> SplitDataset:
    """Merge the shipped training and test pairs of a directory

    A random val_fraction of the training file becomes the validation split;
    the test file is the test split.

    :param limit: keep only the first ``limit`` samples of each file
    """
    data_dir = Path(data_dir)
    if not 0.0 <= val_fraction < 1.0:
        raise DatasetError(f"validation fraction must lie in [0, 1), got {val_fraction}")
    x_train, y_train = read_mnist_arrays(*(_find(data_dir, s) for s in TRAIN_FILES), raw_pixels=raw_pixels)
    x_test, y_test = read_mnist_arrays(*(_find(data_dir, s) for s in TEST_FILES), raw_pixels=raw_pixels)
    if limit is not None:
        x_train, y_train = x_train[:limit], y_train[:limit]
        x_test, y_test = x_test[:limit], y_test[:limit]

    n_train = y_train.size
    perm = make_rng(seed).permutation(n_train)
    n_val = int(round(val_fraction * n_train))
    split = NodeMask.of(
        perm[n_val:],
        perm[:n_val],
        np.arange(n_train, n_train + y_test.size),
    )
    logger.info(f"MNIST {data_dir}: train {split.train.size}, val {split.val.size}, test {split.test.size}")
    return SplitDataset(
        np.concatenate([x_train, x_test]),
        np.concatenate([y_train, y_test]),
        split,
        NUM_CLASSES,
        "mnist",
    ).check()
