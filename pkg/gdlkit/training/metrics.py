"""
Append-only CSV logs with a fixed column schema
"""
import logging
import pprint
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

logger = logging.getLogger(__name__)


class CsvLog(ABC):
    """Rows are validated against SCHEMA (column -> type) and appended to the
    file as they arrive; a fresh log truncates an existing file.
    """
    def __init__(self, path: Optional[Union[str, Path]] = None) -> None:
        self.path = Path(path) if path is not None else None
        self.rows: List[Dict[str, Any]] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            pd.DataFrame(columns=self.labels).to_csv(self.path, index=False)

    @property
    @abstractmethod
    def SCHEMA(self) -> Dict[str, type]:
        pass

    @property
    def labels(self) -> List[str]:
        return [x for x in self.SCHEMA]

    def __len__(self) -> int:
        return len(self.rows)

    def __str__(self) -> str:
        return pprint.pformat(self.rows)

    def _coerce(self, row: Dict[str, Any]) -> Dict[str, Any]:
        if set(row) != set(self.SCHEMA):
            raise KeyError(f"row columns {sorted(row)} do not match schema {self.labels}")
        out = {}
        for label, value_type in self.SCHEMA.items():
            try:
                out[label] = value_type(row[label])
            except (TypeError, ValueError):
                raise TypeError(f"{label}={row[label]!r} is not of type {value_type.__name__}")
        return out

    def append(self, **row: Any) -> None:
        row = self._coerce(row)
        self.rows.append(row)
        if self.path is not None:
            pd.DataFrame([row], columns=self.labels).to_csv(self.path, mode="a", header=False, index=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.labels)

    @classmethod
    def read(cls, path: Union[str, Path]) -> pd.DataFrame:
        frame = pd.read_csv(path)
        missing = [c for c in cls.SCHEMA if c not in frame.columns]
        if missing:
            raise KeyError(f"{path} lacks columns {missing}")
        return frame


class MetricsLog(CsvLog):
    """Per-split training metrics; loss is NaN where not computed"""
    SCHEMA = {
        "epoch": int,
        "step": int,
        "split": str,
        "loss": float,
        "accuracy": float,
    }

    def latest(self, split: str) -> Optional[Dict[str, Any]]:
        for row in reversed(self.rows):
            if row["split"] == split:
                return row
        return None


class FisherTrace(CsvLog):
    """Numerical Fisher rank along a training trajectory"""
    SCHEMA = {
        "epoch": int,
        "step": int,
        "rank": int,
        "sigma_max": float,
    }
