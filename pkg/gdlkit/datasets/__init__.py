from gdlkit.datasets.splits import GraphDataset, NodeMask, SplitDataset, make_splits, per_class_mask
from gdlkit.datasets.mnist import load_mnist, load_mnist_dir
from gdlkit.datasets.cifar import load_cifar10
from gdlkit.datasets.karate import karate_club
from gdlkit.datasets.cora import load_cora, load_cora_dir
from gdlkit.datasets.toy import toy_blobs
