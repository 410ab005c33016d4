"""
Edge-list text files

One "i j" (or weighted "i j w") line per undirected edge, zero-based node ids.
Label files hold one "i label" line per node. Blank lines and lines starting
with '#' are skipped.
"""
import logging
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from gdlkit.exceptions import MalformedLine
from gdlkit.graphs.graph import Graph

logger = logging.getLogger(__name__)


def _records(path: Path) -> Iterator[Tuple[int, List[str]]]:
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def read_edge_list(path: Union[str, Path], n_nodes: Optional[int] = None) -> Graph:
    """Load a graph; the node count defaults to the largest id + 1

    :raises MalformedLine: on a line that is not "i j" or "i j w"
    :raises DuplicateEdge: on a repeated edge
    :raises SelfLoop: on an "i i" line
    """
    path = Path(path)
    edges, weights = [], []
    weighted = None
    for lineno, fields in _records(path):
        if len(fields) not in (2, 3) or (weighted is not None and (len(fields) == 3) != weighted):
            raise MalformedLine(f"{path}:{lineno}: expected 'i j' or 'i j w', got {' '.join(fields)!r}")
        weighted = len(fields) == 3
        try:
            i, j = int(fields[0]), int(fields[1])
            if weighted:
                weights.append(float(fields[2]))
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: cannot parse {' '.join(fields)!r}")
        if i < 0 or j < 0:
            raise MalformedLine(f"{path}:{lineno}: negative node id")
        edges.append((i, j))
    if n_nodes is None:
        n_nodes = 1 + max((max(e) for e in edges), default=-1)
    g = Graph(n_nodes, edges, edge_weights=weights if weighted else None)
    logger.debug(f"read {g} from {path}")
    return g


def write_edge_list(g: Graph, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        if g.edge_weights is None:
            for i, j in g.edges:
                f.write(f"{i} {j}\n")
        else:
            for (i, j), w in zip(g.edges, g.edge_weights):
                f.write(f"{i} {j} {w!r}\n")


def read_labels(path: Union[str, Path], n_nodes: int) -> np.ndarray:
    """Per-node integer labels; nodes missing from the file get -1"""
    path = Path(path)
    labels = np.full(n_nodes, -1, dtype=np.int64)
    for lineno, fields in _records(path):
        try:
            node, label = int(fields[0]), int(fields[1])
        except (ValueError, IndexError):
            raise MalformedLine(f"{path}:{lineno}: expected 'i label', got {' '.join(fields)!r}")
        if not 0 <= node < n_nodes:
            raise MalformedLine(f"{path}:{lineno}: node {node} outside [0, {n_nodes})")
        labels[node] = label
    return labels
