"""
Architecture strings

    linear:784-10               affine classifier
    mlp:784-500-10              affine layers between consecutive widths
    cnn:28x28-c4k5-p2-10        HxW image, c<channels>k<kernel> valid conv,
                                optional p<block> max pooling, then MLP widths
    gcn:34-4-4-2                Kipf-Welling message passing layers
    sage:...  mp:...            GraphSAGE / generic message passing layers
    gat:1433-8x8-7              attention layers; HxD = H heads of width D,
                                a plain width is a single head

The first number is the input dimension, the last one the output dimension.
"""
import logging
import re
from typing import NamedTuple, Optional, Sequence, Tuple, Union

from gdlkit.exceptions import ArchitectureError
from gdlkit.gnn.encoder_decoder import EncoderDecoder
from gdlkit.gnn.gat import GatLayer
from gdlkit.gnn.message_passing import MessagePassingLayer, MPVariant
from gdlkit.layers.activations import Activation
from gdlkit.layers.model import Model, cnn, mlp

logger = logging.getLogger(__name__)

DENSE_FAMILIES = ("linear", "mlp", "cnn")
GRAPH_FAMILIES = {"gcn": MPVariant.KIPF_WELLING, "sage": MPVariant.GRAPHSAGE, "mp": MPVariant.GENERIC}
FAMILIES = DENSE_FAMILIES + tuple(GRAPH_FAMILIES) + ("gat",)

_IMAGE = re.compile(r"^(\d+)x(\d+)$")
_CONV = re.compile(r"^c(\d+)k(\d+)$")
_POOL = re.compile(r"^p(\d+)$")
_HEADS = re.compile(r"^(\d+)x(\d+)$")

Built = Union[Model, EncoderDecoder]


class ArchSpec(NamedTuple):
    """Parsed architecture string

    Attributes:
        family: one of FAMILIES
        dims: input width, hidden widths, output width
        heads: attention heads per hidden layer (gat only)
        image: (height, width) of the input image (cnn only)
        channels: convolution output channels (cnn only)
        kernel: square filter size (cnn only)
        pool: square pooling block, 1 for none (cnn only)
    """
    family: str
    dims: Tuple[int, ...]
    heads: Tuple[int, ...] = ()
    image: Tuple[int, int] = (0, 0)
    channels: int = 0
    kernel: int = 0
    pool: int = 1

    @property
    def is_graph(self) -> bool:
        return self.family in GRAPH_FAMILIES or self.family == "gat"

    @property
    def in_dim(self) -> int:
        return self.dims[0]

    @property
    def out_dim(self) -> int:
        return self.dims[-1]

    @property
    def hidden(self) -> Tuple[int, ...]:
        return self.dims[1:-1]

    def __str__(self) -> str:
        if self.family == "cnn":
            parts = [f"{self.image[0]}x{self.image[1]}", f"c{self.channels}k{self.kernel}"]
            if self.pool > 1:
                parts.append(f"p{self.pool}")
            parts.extend(str(d) for d in self.dims[1:])
        elif self.family == "gat":
            parts = [str(self.in_dim)]
            parts.extend(f"{h}x{d}" for h, d in zip(self.heads, self.hidden))
            parts.append(str(self.out_dim))
        else:
            parts = [str(d) for d in self.dims]
        return f"{self.family}:{'-'.join(parts)}"

    @property
    def tag(self) -> str:
        """Filesystem-safe form of the string"""
        return str(self).replace(":", "_")

    def with_overrides(self, hidden: Optional[Sequence[int]] = None,
                       heads: Optional[Sequence[int]] = None) -> "ArchSpec":
        """Replace hidden widths and/or GAT head counts

        A single head count applies to every hidden layer.
        """
        spec = self
        if hidden is not None:
            hidden = tuple(int(h) for h in hidden)
            if any(h < 1 for h in hidden):
                raise ArchitectureError(f"hidden widths must be positive, got {hidden}")
            if spec.family == "linear" and hidden:
                raise ArchitectureError("a linear classifier has no hidden layers")
            family = "mlp" if spec.family == "linear" else spec.family
            new_heads = spec.heads
            if spec.family == "gat" and len(hidden) != len(spec.heads):
                new_heads = (spec.heads[0] if spec.heads else 1,) * len(hidden)
            spec = spec._replace(family=family, dims=(spec.in_dim,) + hidden + (spec.out_dim,), heads=new_heads)
        if heads is not None:
            if spec.family != "gat":
                raise ArchitectureError(f"head counts only apply to gat architectures, not {spec.family}")
            heads = tuple(int(h) for h in heads)
            if len(heads) == 1:
                heads = heads * len(spec.hidden)
            if len(heads) != len(spec.hidden) or any(h < 1 for h in heads):
                raise ArchitectureError(f"{len(spec.hidden)} hidden attention layers, got head counts {heads}")
            spec = spec._replace(heads=heads)
        return spec

    def build(self, activation: Activation, decoder: Optional["ArchSpec"] = None,
              self_loops: bool = False) -> Built:
        """Instantiate the model; the final layer of the whole stack has no activation"""
        if not self.is_graph:
            if decoder is not None:
                raise ArchitectureError(f"a decoder only follows a graph encoder, not {self.family}")
            if self.family == "cnn":
                return cnn(self.image[0], self.image[1], self.channels, self.kernel, self.pool,
                           self.dims[1:], activation)
            return mlp(self.dims, activation)

        head: Optional[Model] = None
        if decoder is not None:
            if decoder.family not in ("linear", "mlp"):
                raise ArchitectureError(f"decoders are linear or mlp, got {decoder.family}")
            if decoder.in_dim != self.out_dim:
                raise ArchitectureError(f"encoder produces {self.out_dim} features, decoder {decoder} expects {decoder.in_dim}")
            head = decoder.build(activation)
        n_layers = len(self.dims) - 1
        last_act = activation if head is not None else None
        layers = []
        if self.family == "gat":
            width = self.in_dim
            for h, d in zip(self.heads, self.hidden):
                layers.append(GatLayer(width, d, heads=h, activation=activation, self_loops=self_loops))
                width = h * d
            layers.append(GatLayer(width, self.out_dim, heads=1, activation=last_act, self_loops=self_loops))
        else:
            variant = GRAPH_FAMILIES[self.family]
            for k in range(n_layers):
                act = activation if k < n_layers - 1 else last_act
                layers.append(MessagePassingLayer(self.dims[k], self.dims[k + 1], variant, act))
        return EncoderDecoder(layers, head)


def _positive(token: str, text: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ArchitectureError(f"{text!r}: {token!r} is not a width")
    if value < 1:
        raise ArchitectureError(f"{text!r}: widths must be positive, got {value}")
    return value


def _parse_cnn(tokens, text: str) -> ArchSpec:
    image = _IMAGE.match(tokens[0]) if tokens else None
    conv = _CONV.match(tokens[1]) if len(tokens) > 1 else None
    if image is None or conv is None:
        raise ArchitectureError(f"{text!r}: expected cnn:HxW-c<channels>k<kernel>[-p<block>]-widths")
    height, width = int(image.group(1)), int(image.group(2))
    channels, kernel = int(conv.group(1)), int(conv.group(2))
    rest = tokens[2:]
    pool = 1
    if rest and _POOL.match(rest[0]):
        pool = int(_POOL.match(rest[0]).group(1))
        rest = rest[1:]
    if not rest:
        raise ArchitectureError(f"{text!r}: a cnn needs at least the class count after the convolution")
    if min(height, width, channels, kernel, pool) < 1 or kernel > min(height, width):
        raise ArchitectureError(f"{text!r}: kernel {kernel} does not fit a {height}x{width} image")
    if pool > 1 and ((height - kernel + 1) % pool or (width - kernel + 1) % pool):
        raise ArchitectureError(
            f"{text!r}: pooling block {pool} does not tile the {height - kernel + 1}x{width - kernel + 1} feature map"
        )
    dims = (height * width,) + tuple(_positive(t, text) for t in rest)
    return ArchSpec("cnn", dims, image=(height, width), channels=channels, kernel=kernel, pool=pool)


def _parse_gat(tokens, text: str) -> ArchSpec:
    if len(tokens) < 2:
        raise ArchitectureError(f"{text!r}: a gat needs input and output widths")
    heads, hidden = [], []
    for token in tokens[1:-1]:
        m = _HEADS.match(token)
        if m:
            heads.append(_positive(m.group(1), text))
            hidden.append(_positive(m.group(2), text))
        else:
            heads.append(1)
            hidden.append(_positive(token, text))
    dims = (_positive(tokens[0], text),) + tuple(hidden) + (_positive(tokens[-1], text),)
    return ArchSpec("gat", dims, heads=tuple(heads))


def parse_architecture(text: str) -> ArchSpec:
    """Parse an architecture string

    :raises ArchitectureError: on an unknown family or a malformed dimension chain
    """
    family, sep, body = text.strip().lower().partition(":")
    if not sep or family not in FAMILIES:
        raise ArchitectureError(f"{text!r}: expected <family>:<dims> with family in {list(FAMILIES)}")
    tokens = [t for t in body.split("-") if t]
    if family == "cnn":
        return _parse_cnn(tokens, text)
    if family == "gat":
        return _parse_gat(tokens, text)
    if len(tokens) < 2:
        raise ArchitectureError(f"{text!r}: need at least input and output widths")
    dims = tuple(_positive(t, text) for t in tokens)
    if family == "linear" and len(dims) != 2:
        raise ArchitectureError(f"{text!r}: a linear classifier is exactly input-output")
    return ArchSpec(family, dims)


def build_model(arch: str, activation: str = "relu", decoder: str = "",
                hidden: Optional[Sequence[int]] = None, heads: Optional[Sequence[int]] = None,
                self_loops: bool = False) -> Tuple[ArchSpec, Built]:
    spec = parse_architecture(arch).with_overrides(hidden, heads)
    decoder_spec = parse_architecture(decoder) if decoder else None
    act = Activation.parse(activation)
    model = spec.build(act, decoder_spec, self_loops)
    logger.debug(f"built {spec} (decoder {decoder_spec}, activation {act}) with {model.num_weights} weights")
    return spec, model
