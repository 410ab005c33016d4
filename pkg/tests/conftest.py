import logging
import os
from pathlib import Path

import numpy as np
import pytest

from gdlkit.global_vars import DATA_DIR_ENV_VAR
from gdlkit.graphs.graph import Graph


@pytest.fixture(autouse=True)
def _reset_root_logger():
    """Commands install root handlers; drop them between tests"""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def path_graph():
    """0 - 1 - 2 - 3"""
    return Graph(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def triangle():
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def data_dir() -> Path:
    """Dataset root for the slow acceptance runs, skipped when nothing is there"""
    root = os.environ.get(DATA_DIR_ENV_VAR)
    if not root or not Path(root).is_dir() or not any(Path(root).iterdir()):
        pytest.skip(f"${DATA_DIR_ENV_VAR} holds no dataset files")
    return Path(root)
