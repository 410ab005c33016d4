"""
Binary model checkpoints

Layout, all little-endian:
    magic "GDL1" | u32 layer count
    per layer:  u8 kind | u8 tensor count
    per tensor: u8 ndim | ndim x u64 dims | row-major f64 data
"""
import logging
import struct
from pathlib import Path
from typing import List, NamedTuple, Protocol, Union

import numpy as np

from gdlkit.autodiff.tensor import Tensor
from gdlkit.exceptions import BadCheckpoint, ShapeMismatch
from gdlkit.global_vars import CHECKPOINT_MAGIC
from gdlkit.layers.base_layer import BaseLayer, layer_registry

logger = logging.getLogger(__name__)


class LayeredModel(Protocol):
    def iter_layers(self) -> List[BaseLayer]:
        ...


class LayerRecord(NamedTuple):
    kind: int
    tensors: List[Tensor]


def write_checkpoint(model: LayeredModel, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    layers = model.iter_layers()
    chunks = [CHECKPOINT_MAGIC, struct.pack("<I", len(layers))]
    for layer in layers:
        tensors = layer.tensors()
        chunks.append(struct.pack("<BB", layer.KIND, len(tensors)))
        for t in tensors:
            chunks.append(struct.pack("<B", t.ndim))
            chunks.append(struct.pack(f"<{t.ndim}Q", *t.shape))
            chunks.append(np.ascontiguousarray(t, dtype="<f8").tobytes())
    path.write_bytes(b"".join(chunks))
    logger.debug(f"wrote checkpoint with {len(layers)} layers to {path}")


class _Reader:
    def __init__(self, buf: bytes, path: Path) -> None:
        self.buf, self.pos, self.path = buf, 0, path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise BadCheckpoint(f"{self.path}: truncated at byte {self.pos} (wanted {n} more)")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def read_checkpoint(path: Union[str, Path]) -> List[LayerRecord]:
    """Parse a checkpoint file into per-layer tensor records

    :raises BadCheckpoint: on a wrong magic, truncation, trailing bytes or an unknown layer kind
    """
    path = Path(path)
    if not path.is_file():
        raise BadCheckpoint(f"checkpoint {path} does not exist")
    reader = _Reader(path.read_bytes(), path)
    if reader.take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        raise BadCheckpoint(f"{path}: not a gdlkit checkpoint (bad magic)")
    (n_layers,) = reader.unpack("<I")
    records = []
    for _ in range(n_layers):
        kind, n_tensors = reader.unpack("<BB")
        if kind not in layer_registry:
            raise BadCheckpoint(f"{path}: unknown layer kind {kind}")
        tensors = []
        for _ in range(n_tensors):
            (ndim,) = reader.unpack("<B")
            shape = reader.unpack(f"<{ndim}Q")
            count = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(reader.take(8 * count), dtype="<f8")
            tensors.append(data.astype(np.float64).reshape(shape))
        records.append(LayerRecord(kind, tensors))
    if reader.pos != len(reader.buf):
        raise BadCheckpoint(f"{path}: {len(reader.buf) - reader.pos} trailing bytes")
    return records


def load_checkpoint(model: LayeredModel, path: Union[str, Path]) -> None:
    """Load checkpoint weights into a model of the same architecture

    :raises ShapeMismatch: if the layer sequence or a tensor shape differs
    """
    records = read_checkpoint(path)
    layers = model.iter_layers()
    if len(records) != len(layers):
        raise ShapeMismatch(f"checkpoint has {len(records)} layers, model has {len(layers)}")
    for k, (record, layer) in enumerate(zip(records, layers)):
        if record.kind != layer.KIND:
            raise ShapeMismatch(
                f"layer {k}: checkpoint holds a {layer_registry[record.kind].__name__}, "
                f"model has a {type(layer).__name__}"
            )
        layer.load_tensors(record.tensors)
