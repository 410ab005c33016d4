"""
JSON sidecar of a binary checkpoint

The weights file stores tensors only; the sidecar records how to rebuild the
model around them and how dataset labels map to class indices.
"""
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Tuple, Union

from gdlkit.exceptions import BadCheckpoint


def sidecar_path(checkpoint_path: Union[str, Path]) -> Path:
    checkpoint_path = Path(checkpoint_path)
    return checkpoint_path.with_name(checkpoint_path.name + ".json")


@dataclass(frozen=True)
class CheckpointMeta:
    """CheckpointMeta class

    Attributes:
        arch: architecture string, overrides applied
        decoder: decoder string, empty for none
        activation: activation string
        dataset: dataset id
        class_names: class index -> name
        self_loops: GAT self attention flag
        epoch: epochs trained when written
        step: SGD steps applied when written
    """
    arch: str
    decoder: str
    activation: str
    dataset: str
    class_names: Tuple[str, ...] = ()
    self_loops: bool = False
    epoch: int = 0
    step: int = 0
    extra: Dict[str, Any] = field(default_factory=dict)

    def _convert_to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["class_names"] = list(self.class_names)
        return data

    @classmethod
    def _convert_from_dict(cls, data: Dict[str, Any]) -> "CheckpointMeta":
        try:
            return cls(
                arch=data["arch"],
                decoder=data.get("decoder", ""),
                activation=data.get("activation", "relu"),
                dataset=data["dataset"],
                class_names=tuple(data.get("class_names", ())),
                self_loops=bool(data.get("self_loops", False)),
                epoch=int(data.get("epoch", 0)),
                step=int(data.get("step", 0)),
                extra=dict(data.get("extra", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise BadCheckpoint(f"malformed checkpoint sidecar: {e!r}")

    def record_json(self, checkpoint_path: Union[str, Path]) -> Path:
        json_path = sidecar_path(checkpoint_path)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        with open(json_path, "w") as file:
            json.dump(self._convert_to_dict(), file, indent=4, sort_keys=True)
        return json_path

    @classmethod
    def from_json(cls, checkpoint_path: Union[str, Path]) -> "CheckpointMeta":
        json_path = sidecar_path(checkpoint_path)
        try:
            with open(json_path, "r") as file:
                data = json.load(file)
        except FileNotFoundError:
            raise BadCheckpoint(f"checkpoint sidecar {json_path} does not exist")
        except json.JSONDecodeError as e:
            raise BadCheckpoint(f"checkpoint sidecar {json_path} is not valid json: {e}")
        return cls._convert_from_dict(data)
