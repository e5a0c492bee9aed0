"""
Dense tensors with reverse-mode differentiation.

Usage:
    w = Tensor(np.ones((3, 2)), requires_grad=True)
    loss = ops.reduce_sum(ops.matmul(x, w))
    backward(loss)
    w.grad                                   # d loss / d w

Every primitive in `numcore.ops` returns a Tensor that remembers its parents
and a backward rule when at least one parent requires gradients. `backward`
orders the recorded nodes into a Tape and replays it in reverse.
"""

import threading
from contextlib import contextmanager
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import GraphDetached, ShapeMismatch

BackwardRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, 'enabled', True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Inference block: nothing is recorded, parameters are only read."""
    previous = grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = previous


class Tensor:
    __slots__ = ('value', 'grad', 'requires_grad', 'parents', 'backward_rule', 'op', 'name')

    def __init__(self, value, requires_grad: bool = False, name: str = "", dtype=None):
        array = np.asarray(value, dtype=dtype)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.value: np.ndarray = np.ascontiguousarray(array)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.parents: Tuple['Tensor', ...] = ()
        self.backward_rule: Optional[BackwardRule] = None
        self.op = "leaf"
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def size(self) -> int:
        return self.value.size

    @property
    def dtype(self):
        return self.value.dtype

    @property
    def is_leaf(self) -> bool:
        return not self.parents

    def item(self) -> float:
        return float(self.value.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    # operator sugar; the rules live in ops
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from . import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)


def as_tensor(value, dtype=None) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value, dtype=dtype)


def make_node(value: np.ndarray, parents: Sequence[Tensor], rule: BackwardRule, op: str) -> Tensor:
    """Result tensor; the parents and rule are only kept when a gradient can flow."""
    out = Tensor(value)
    if grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out.parents = tuple(parents)
        out.backward_rule = rule
        out.op = op
    return out


class Tape:
    """Recorded operations reachable from one output, in topological order."""

    def __init__(self, nodes: List[Tensor]):
        self.nodes = nodes

    @classmethod
    def from_output(cls, output: Tensor) -> 'Tape':
        order: List[Tensor] = []
        seen = set()
        # iterative post-order; parents are visited in their recorded order
        stack: List[Tuple[Tensor, bool]] = [(output, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in reversed(node.parents):
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        return cls(order)

    @property
    def leaves(self) -> List[Tensor]:
        return [node for node in self.nodes if node.is_leaf and node.requires_grad]

    def __len__(self) -> int:
        return len(self.nodes)

    def replay(self, output: Tensor, seed: np.ndarray) -> Dict[int, np.ndarray]:
        """Reverse pass; returns the gradient of every leaf keyed by id."""
        grads: Dict[int, np.ndarray] = {id(output): seed}
        leaf_grads: Dict[int, np.ndarray] = {}
        for node in reversed(self.nodes):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                leaf_grads[id(node)] = g
                continue
            for parent, pg in zip(node.parents, node.backward_rule(g)):
                if pg is None or not parent.requires_grad:
                    continue
                if pg.shape != parent.shape:
                    raise ShapeMismatch(f"backward of {node.op}", pg.shape, parent.shape)
                key = id(parent)
                grads[key] = grads[key] + pg if key in grads else pg
        return leaf_grads


def backward(loss: Tensor) -> Tape:
    """Accumulate d loss / d leaf into `leaf.grad` for every reachable parameter."""
    if loss.size != 1:
        raise ShapeMismatch("backward", loss.shape, ())
    if not loss.requires_grad:
        raise GraphDetached("loss does not depend on any parameter")
    tape = Tape.from_output(loss)
    leaves = tape.leaves
    if not leaves:
        raise GraphDetached("loss does not depend on any parameter")
    leaf_grads = tape.replay(loss, np.ones(loss.shape, dtype=loss.dtype))
    for leaf in leaves:
        g = leaf_grads.get(id(leaf))
        if g is None:
            continue
        leaf.grad = g.copy() if leaf.grad is None else leaf.grad + g
    return tape
