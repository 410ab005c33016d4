import logging
from pathlib import Path
from typing import Optional


_VERBOSE = logging.DEBUG
_INFO = logging.INFO


def setup_logger(log_fpath: Optional[str], verbose: bool = False):
    """Console at INFO (DEBUG when verbose), run log file at DEBUG, overwritten per run"""
    root_logger = logging.getLogger()
    root_logger.setLevel(_VERBOSE if log_fpath is not None or verbose else _INFO)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(_VERBOSE if verbose else _INFO)
    console_handler.setFormatter(logging.Formatter('[%(name)s] %(message)s'))
    root_logger.addHandler(console_handler)

    if log_fpath is not None:
        Path(log_fpath).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(Path(log_fpath).resolve(), 'w')
        file_handler.setLevel(_VERBOSE)
        file_handler.setFormatter(logging.Formatter('%(levelname)s [%(name)s] %(message)s'))
        root_logger.addHandler(file_handler)
