import gzip

import numpy as np
import pytest

from gdlkit.datasets.cifar import load_cifar10, read_cifar10_batch, write_cifar10_batch
from gdlkit.datasets.cora import load_cora, load_cora_dir, normalize_rows, read_content
from gdlkit.datasets.karate import karate_club
from gdlkit.datasets.mnist import (
    load_mnist,
    load_mnist_dir,
    read_idx_images,
    read_idx_labels,
    read_mnist_arrays,
    write_idx_images,
    write_idx_labels,
)
from gdlkit.datasets.splits import NodeMask, SplitDataset, make_splits, per_class_mask
from gdlkit.datasets.toy import toy_blobs
from gdlkit.exceptions import (
    BadFractions,
    BadMagic,
    CountMismatch,
    DatasetError,
    EmptyMask,
    LabelOutOfRange,
    MalformedLine,
    ShapeMismatch,
    TruncatedFile,
    UnknownNodeId,
)
from gdlkit.graphs.graph_io import read_edge_list
from gdlkit.graphs.matrices import connected_components


def write_mnist_pair(directory, stem_images, stem_labels, n, rng, gz=False):
    images = rng.integers(0, 256, size=(n, 28, 28), dtype=np.uint8)
    labels = rng.integers(0, 10, size=n, dtype=np.uint8)
    suffix = ".gz" if gz else ""
    write_idx_images(directory / (stem_images + suffix), images)
    write_idx_labels(directory / (stem_labels + suffix), labels)
    return images, labels


"""
Splits
"""
def test_make_splits_partition():
    mask = make_splits(100, seed=3)
    assert mask.sizes() == (80, 10, 10)
    together = np.concatenate([mask.train, mask.val, mask.test])
    assert sorted(together.tolist()) == list(range(100))
    np.testing.assert_array_equal(make_splits(100, seed=3).train, mask.train)
    assert make_splits(7, (0.5, 0.25, 0.25)).sizes() == (3, 2, 2)


@pytest.mark.parametrize("fractions", [(0.5, 0.5), (0.8, 0.3, -0.1), (0.6, 0.3, 0.3), (0.0, 0.5, 0.5)])
def test_bad_fractions(fractions):
    with pytest.raises(BadFractions):
        make_splits(10, fractions)


def test_node_mask_validation():
    mask = NodeMask.of([3, 1], [0], [2])
    assert mask.train.tolist() == [1, 3]
    assert mask.get("val").tolist() == [0]
    with pytest.raises(EmptyMask):
        NodeMask.of([], [0, 1])
    with pytest.raises(ShapeMismatch):
        NodeMask.of([0, 1], [1])


def test_per_class_mask():
    labels = np.array([0, 0, 0, 1, 1, 1, 2, 2, 2, 2])
    mask = per_class_mask(labels, 2, 2, 1, seed=0)
    assert mask.sizes() == (6, 2, 1)
    assert np.bincount(labels[mask.train]).tolist() == [2, 2, 2]
    with pytest.raises(BadFractions):
        per_class_mask(labels, 2, 3, 2, seed=0)


def test_split_dataset_checks():
    split = NodeMask.of([0, 1])
    with pytest.raises(LabelOutOfRange):
        SplitDataset(np.zeros((2, 3)), np.array([0, 3]), split, 3).check()
    with pytest.raises(ShapeMismatch):
        SplitDataset(np.zeros((3, 3)), np.array([0, 1]), split, 3).check()
    dataset = toy_blobs(n=30, d=5, num_classes=2)
    assert dataset.dim == 5 and dataset.name == "toy"
    X, y = dataset.subset("test")
    assert X.shape == (3, 5) and y.shape == (3,)


"""
MNIST
"""
@pytest.mark.parametrize("gz", [False, True])
def test_idx_round_trip(tmp_path, rng, gz):
    images, labels = write_mnist_pair(tmp_path, "img", "lbl", 5, rng, gz=gz)
    suffix = ".gz" if gz else ""
    np.testing.assert_array_equal(read_idx_images(tmp_path / ("img" + suffix)), images)
    np.testing.assert_array_equal(read_idx_labels(tmp_path / ("lbl" + suffix)), labels)
    if gz:
        with gzip.open(tmp_path / "img.gz", "rb") as f:
            assert f.read(4) == b"\x00\x00\x08\x03"


def test_pixels_are_scaled(tmp_path, rng):
    images, labels = write_mnist_pair(tmp_path, "img", "lbl", 4, rng)
    samples, y = read_mnist_arrays(tmp_path / "img", tmp_path / "lbl")
    assert samples.shape == (4, 784) and samples.max() <= 1.0
    np.testing.assert_allclose(samples[0], images[0].reshape(-1) / 255.0)
    raw, _ = read_mnist_arrays(tmp_path / "img", tmp_path / "lbl", raw_pixels=True)
    np.testing.assert_array_equal(raw[0], images[0].reshape(-1))
    np.testing.assert_array_equal(y, labels)

    dataset = load_mnist(tmp_path / "img", tmp_path / "lbl")
    assert dataset.split.sizes() == (4, 0, 0) and dataset.num_classes == 10


def test_idx_errors(tmp_path, rng):
    write_mnist_pair(tmp_path, "img", "lbl", 3, rng)
    write_idx_labels(tmp_path / "lbl20", rng.integers(0, 10, size=20))
    with pytest.raises(BadMagic):
        read_idx_images(tmp_path / "lbl20")
    with pytest.raises(BadMagic):
        read_idx_labels(tmp_path / "img")

    truncated = tmp_path / "short"
    truncated.write_bytes((tmp_path / "img").read_bytes()[:-10])
    with pytest.raises(TruncatedFile):
        read_idx_images(truncated)
    truncated.write_bytes(b"\x00\x00\x08")
    with pytest.raises(TruncatedFile):
        read_idx_labels(truncated)

    write_idx_labels(tmp_path / "lbl4", rng.integers(0, 10, size=4))
    with pytest.raises(CountMismatch):
        read_mnist_arrays(tmp_path / "img", tmp_path / "lbl4")
    with pytest.raises(DatasetError):
        read_idx_images(tmp_path / "absent")


def test_load_mnist_dir(tmp_path, rng):
    write_mnist_pair(tmp_path, "train-images-idx3-ubyte", "train-labels-idx1-ubyte", 20, rng, gz=True)
    write_mnist_pair(tmp_path, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", 6, rng)
    dataset = load_mnist_dir(tmp_path, val_fraction=0.25, seed=1)
    assert dataset.split.sizes() == (15, 5, 6)
    assert dataset.samples.shape == (26, 784)
    np.testing.assert_array_equal(dataset.split.test, np.arange(20, 26))

    limited = load_mnist_dir(tmp_path, val_fraction=0.0, limit=4)
    assert limited.split.sizes() == (4, 0, 4)
    with pytest.raises(DatasetError):
        load_mnist_dir(tmp_path, val_fraction=1.0)
    with pytest.raises(DatasetError):
        load_mnist_dir(tmp_path / "nowhere")


"""
CIFAR-10
"""
def test_cifar_round_trip(tmp_path, rng):
    pixels = rng.integers(0, 256, size=(3, 3072), dtype=np.uint8)
    labels = np.array([0, 9, 4])
    path = tmp_path / "data_batch_1.bin"
    write_cifar10_batch(path, pixels, labels)
    assert path.stat().st_size == 3 * 3073
    got_pixels, got_labels = read_cifar10_batch(path)
    np.testing.assert_array_equal(got_pixels, pixels)
    np.testing.assert_array_equal(got_labels, labels)


def test_cifar_splits_by_file_name(tmp_path, rng):
    for name, n in (("data_batch_1.bin", 4), ("data_batch_2.bin", 2), ("test_batch.bin", 3)):
        write_cifar10_batch(tmp_path / name, rng.integers(0, 256, size=(n, 3072)), rng.integers(0, 10, size=n))
    paths = sorted(tmp_path.glob("*.bin"))
    dataset = load_cifar10(paths)
    assert dataset.split.sizes() == (6, 0, 3)
    assert dataset.samples.shape == (9, 3072) and dataset.samples.max() <= 1.0

    test_only = load_cifar10([tmp_path / "test_batch.bin"], raw_pixels=True)
    assert test_only.split.sizes() == (3, 0, 0)
    assert test_only.samples.max() > 1.0


def test_cifar_errors(tmp_path, rng):
    path = tmp_path / "data_batch_1.bin"
    write_cifar10_batch(path, rng.integers(0, 256, size=(2, 3072)), [1, 2])
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(TruncatedFile):
        read_cifar10_batch(path)
    path.write_bytes(b"")
    with pytest.raises(TruncatedFile):
        read_cifar10_batch(path)

    write_cifar10_batch(path, rng.integers(0, 256, size=(1, 3072)), [10])
    with pytest.raises(LabelOutOfRange):
        read_cifar10_batch(path)
    with pytest.raises(DatasetError):
        load_cifar10([])
    with pytest.raises(DatasetError):
        read_cifar10_batch(tmp_path / "absent.bin")


"""
Karate club
"""
def test_karate_club(tmp_path):
    dataset = karate_club(seed=0)
    g = dataset.graph
    assert (g.n_nodes, g.num_edges, dataset.num_classes) == (34, 78, 4)
    assert connected_components(g)[0] == 1
    assert g.degrees.min() >= 1
    np.testing.assert_array_equal(dataset.features, np.eye(34))
    assert dataset.mask.sizes() == (4, 30, 0)
    assert sorted(dataset.labels[dataset.mask.train].tolist()) == [0, 1, 2, 3]

    path = tmp_path / "karate.txt"
    dataset.export_edge_list(path)
    assert read_edge_list(path, 34) == g


def test_karate_training_nodes():
    dataset = karate_club(train_nodes=[0, 33])
    assert dataset.mask.train.tolist() == [0, 33]
    assert karate_club(seed=5).mask.train.tolist() == karate_club(seed=5).mask.train.tolist()
    with pytest.raises(DatasetError):
        karate_club(train_nodes=[34])


"""
Cora
"""
@pytest.fixture
def tiny_cora(tmp_path):
    content = tmp_path / "cora.content"
    content.write_text(
        "p10\t1\t0\t1\tTheory\n"
        "p20\t0\t0\t0\tNeural_Networks\n"
        "p30\t1\t1\t0\tTheory\n"
        "p40\t0\t1\t1\tNeural_Networks\n"
        "p50\t1\t1\t1\tRule_Learning\n"
        "p60\t0\t0\t1\tRule_Learning\n"
    )
    cites = tmp_path / "cora.cites"
    cites.write_text("p10\tp20\np20\tp10\np30\tp40\np50\tp50\np60\tp10\np40\tp50\n")
    return content, cites


def test_load_tiny_cora(tiny_cora):
    content, cites = tiny_cora
    dataset = load_cora(content, cites, split_sizes=(1, 2, 1))
    assert dataset.class_names == ("Theory", "Neural_Networks", "Rule_Learning")
    assert dataset.labels.tolist() == [0, 1, 0, 1, 2, 2]
    # duplicate and self citations collapse
    assert dataset.graph.edges == ((0, 1), (0, 5), (2, 3), (3, 4))
    assert dataset.features.shape == (6, 3)
    assert dataset.mask.sizes() == (3, 2, 1)


def test_cora_feature_normalization(tiny_cora):
    content, cites = tiny_cora
    dataset = load_cora(content, cites, normalize_features=True, split_sizes=(1, 1, 1))
    sums = dataset.features.sum(axis=1)
    np.testing.assert_allclose(sums[[0, 2, 3, 4, 5]], 1.0)
    assert sums[1] == 0.0
    np.testing.assert_allclose(normalize_rows(np.array([[2.0, 2.0], [0.0, 0.0]])), [[0.5, 0.5], [0.0, 0.0]])


def test_cora_dir_layout(tmp_path, tiny_cora):
    nested = tmp_path / "cora"
    nested.mkdir()
    for path in tiny_cora:
        (nested / path.name).write_text(path.read_text())
    with pytest.raises(BadFractions):
        # the default mask needs far more nodes than six
        load_cora_dir(tmp_path)


def test_cora_errors(tiny_cora, tmp_path):
    content, cites = tiny_cora
    cites.write_text("p10\tp99\n")
    with pytest.raises(UnknownNodeId):
        load_cora(content, cites, split_sizes=(1, 1, 1))
    cites.write_text("p10 p20 p30\n")
    with pytest.raises(MalformedLine):
        load_cora(content, cites, split_sizes=(1, 1, 1))

    ragged = tmp_path / "ragged.content"
    ragged.write_text("p1\t1\t0\tA\np2\t1\tB\n")
    with pytest.raises(MalformedLine):
        read_content(ragged)
    with pytest.raises(DatasetError):
        read_content(tmp_path / "absent.content")


"""
Shipped datasets
"""
@pytest.mark.slow
def test_real_mnist(data_dir):
    if not (data_dir / "mnist").is_dir():
        pytest.skip("no mnist directory")
    dataset = load_mnist_dir(data_dir / "mnist")
    assert dataset.split.sizes() == (54000, 6000, 10000)
    assert dataset.dim == 784


@pytest.mark.slow
def test_real_cora(data_dir):
    if not (data_dir / "cora").is_dir():
        pytest.skip("no cora directory")
    dataset = load_cora_dir(data_dir)
    assert dataset.graph.n_nodes == 2708
    assert dataset.features.shape == (2708, 1433)
    assert dataset.num_classes == 7
    assert dataset.mask.sizes() == (140, 500, 1000)


@pytest.mark.slow
def test_real_cifar10(data_dir):
    paths = sorted((data_dir / "cifar-10-batches-bin").glob("*_batch*.bin"))
    if not paths:
        pytest.skip("no CIFAR-10 batches")
    dataset = load_cifar10(paths)
    assert dataset.dim == 3072
    assert dataset.samples.shape[0] == 10000 * len(paths)
