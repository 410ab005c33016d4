"""
Cora citation network

``cora.content``: ``paper_id <TAB> features... <TAB> class_name`` per line.
``cora.cites``: ``cited_id <TAB> citing_id`` per line. Citations become
undirected edges; node order is the order of the content file.
"""
import logging
from pathlib import Path
from typing import Dict, List, Set, Tuple, Union

import numpy as np

from gdlkit.autodiff.tensor import DTYPE
from gdlkit.datasets.splits import GraphDataset, per_class_mask
from gdlkit.exceptions import DatasetError, MalformedLine, UnknownNodeId
from gdlkit.graphs.graph import Graph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRAIN_PER_CLASS = 20
NUM_VAL = 500
NUM_TEST = 1000


def _lines(path: Path):
    if not path.exists():
        raise DatasetError(f"missing Cora file {path}")
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if line.strip():
                yield lineno, line.split()


def read_content(path: PathLike) -> Tuple[List[str], np.ndarray, List[str]]:
    """Paper ids, feature rows and class names, in file order"""
    path = Path(path)
    ids, rows, classes = [], [], []
    width = None
    for lineno, fields in _lines(path):
        if len(fields) < 3:
            raise MalformedLine(f"{path}:{lineno}: expected id, features and class, got {len(fields)} fields")
        if width is None:
            width = len(fields) - 2
        elif len(fields) - 2 != width:
            raise MalformedLine(f"{path}:{lineno}: {len(fields) - 2} features, earlier lines have {width}")
        try:
            rows.append([float(v) for v in fields[1:-1]])
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: non-numeric feature")
        ids.append(fields[0])
        classes.append(fields[-1])
    if not ids:
        raise DatasetError(f"{path} holds no papers")
    if len(set(ids)) != len(ids):
        raise MalformedLine(f"{path}: repeated paper ids")
    return ids, np.asarray(rows, dtype=DTYPE), classes


def read_cites(path: PathLike, index: Dict[str, int]) -> Set[Tuple[int, int]]:
    """Unique undirected (i < j) node pairs; self citations are dropped"""
    path = Path(path)
    pairs = set()
    self_cites = 0
    for lineno, fields in _lines(path):
        if len(fields) != 2:
            raise MalformedLine(f"{path}:{lineno}: expected 'cited citing', got {' '.join(fields)!r}")
        try:
            i, j = index[fields[0]], index[fields[1]]
        except KeyError as e:
            raise UnknownNodeId(f"{path}:{lineno}: paper {e.args[0]} is not in the content file")
        if i == j:
            self_cites += 1
            continue
        pairs.add((min(i, j), max(i, j)))
    if self_cites:
        logger.debug(f"{path}: dropped {self_cites} self citations")
    return pairs


def normalize_rows(features: np.ndarray) -> np.ndarray:
    """Rows scaled to sum 1; all-zero rows stay zero"""
    sums = features.sum(axis=1, keepdims=True)
    return np.divide(features, sums, out=np.zeros_like(features), where=sums != 0)


def load_cora(
    content_path: PathLike,
    cites_path: PathLike,
    seed: int = 0,
    normalize_features: bool = False,
    split_sizes: Tuple[int, int, int] = (TRAIN_PER_CLASS, NUM_VAL, NUM_TEST),
) -> GraphDataset:
    """Cora as a node classification dataset

    Class names map to indices in first-seen order. The default mask takes 20
    training nodes per class, then 500 validation and 1000 test nodes at random
    (``split_sizes``).

    :raises UnknownNodeId: if a citation names a paper missing from the content file
    :raises MalformedLine: on an unparsable line
    """
    ids, features, class_per_node = read_content(content_path)
    index = {paper: i for i, paper in enumerate(ids)}
    class_names = tuple(dict.fromkeys(class_per_node))
    class_index = {name: c for c, name in enumerate(class_names)}
    labels = np.asarray([class_index[name] for name in class_per_node], dtype=np.int64)

    graph = Graph(len(ids), sorted(read_cites(cites_path, index)))
    if normalize_features:
        features = normalize_rows(features)
    mask = per_class_mask(labels, *split_sizes, seed)
    logger.info(
        f"Cora: {graph.n_nodes} nodes, {graph.num_edges} edges, {features.shape[1]} features, "
        f"{len(class_names)} classes, masks {mask.sizes()}"
    )
    return GraphDataset(graph, features, labels, mask, class_names, "cora").check()


def load_cora_dir(data_dir: PathLike, seed: int = 0, normalize_features: bool = False) -> GraphDataset:
    data_dir = Path(data_dir)
    if (data_dir / "cora").is_dir():
        data_dir = data_dir / "cora"
    return load_cora(data_dir / "cora.content", data_dir / "cora.cites", seed, normalize_features)
