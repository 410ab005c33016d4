"""
Define-by-run tape for reverse-mode differentiation

Each differentiable operation appends a node holding its parents and a
vector-Jacobian product rule. `backward` walks the tape from the root towards
the front, so the recording order is already a topological order.
"""
import logging
import threading
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from gdlkit.autodiff.tensor import Tensor, Variable
from gdlkit.exceptions import NonScalarRoot, TapeMismatch

logger = logging.getLogger(__name__)

VJP = Callable[[Tensor], Sequence[Optional[Tensor]]]


class TapeNode(NamedTuple):
    """Recorded operation"""
    op: str
    output: Variable
    parents: Tuple[Variable, ...]
    vjp: VJP


class Tape:
    """Tape class
    Ordered record of operations. A tape is confined to the thread that builds it.

    Usage:
    >>> with Tape() as tape:
    ...     loss = model.forward(x)
    >>> backward(loss)
    """
    _local = threading.local()

    def __init__(self) -> None:
        self.nodes: List[TapeNode] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def __enter__(self) -> "Tape":
        self._stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        self._stack().pop()

    @classmethod
    def _stack(cls) -> List["Tape"]:
        if not hasattr(cls._local, "stack"):
            cls._local.stack = []
        return cls._local.stack

    @classmethod
    def active(cls) -> Optional["Tape"]:
        stack = cls._stack()
        return stack[-1] if stack else None

    def record(self, op: str, value: Tensor, parents: Tuple[Variable, ...], vjp: VJP) -> Variable:
        out = Variable(value, requires_grad=True)
        out.tape = self
        out.tape_id = len(self.nodes)
        self.nodes.append(TapeNode(op, out, parents, vjp))
        return out


def select_tape(parents: Sequence[Variable]) -> Tape:
    """Pick the tape a new operation is recorded on

    The active context wins, then the tape of an intermediate parent, then a fresh tape.
    """
    tape = Tape.active()
    for parent in parents:
        if parent.tape is None:
            continue
        if tape is None:
            tape = parent.tape
        elif parent.tape is not tape:
            raise TapeMismatch(
                f"operand recorded on another tape (tape_id={parent.tape_id}); "
                "wrap the whole forward pass in a single `with Tape():` block"
            )
    return tape if tape is not None else Tape()


def backward(root: Variable) -> None:
    """Accumulate d(root)/d(variable) into every reachable variable

    :param root: scalar-shaped variable, shape () or (1,)
    :raises NonScalarRoot: if root holds more than one entry
    """
    if root.ndim > 1 or root.value.size != 1:
        raise NonScalarRoot(f"backward needs a scalar root, got shape {root.shape}")

    seed = np.ones_like(root.value)
    if root.tape is None:
        if root.requires_grad:
            root.accumulate(seed)
        return

    tape = root.tape
    adjoints = {root.tape_id: seed}
    for node_id in range(root.tape_id, -1, -1):
        g = adjoints.pop(node_id, None)
        if g is None:
            continue
        node = tape.nodes[node_id]
        node.output.accumulate(g)
        for parent, pg in zip(node.parents, node.vjp(g)):
            if pg is None or not parent.requires_grad:
                continue
            if parent.tape is tape:
                prev = adjoints.get(parent.tape_id)
                adjoints[parent.tape_id] = pg if prev is None else prev + pg
            else:
                parent.accumulate(pg)
