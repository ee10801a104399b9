"""
Computation-graph nodes and reverse-mode differentiation.

Tensors are plain numpy arrays; a ``Node`` wraps one together with its
gradient and the provenance needed to push gradients back to its inputs.
"""
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShapeError

Tensor = np.ndarray
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Node:
    """A value in the graph. Leaves with ``requires_grad`` are trainable parameters."""

    __slots__ = ("value", "grad", "requires_grad", "op", "parents", "_backward", "name")

    def __init__(
        self,
        value: np.ndarray,
        requires_grad: bool = False,
        op: str = "leaf",
        parents: Tuple["Node", ...] = (),
        backward: Optional[BackwardFn] = None,
        name: Optional[str] = None,
    ):
        self.value = value
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.op = op
        self.parents = parents
        self._backward = backward
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def dtype(self):
        return self.value.dtype

    @property
    def is_leaf(self) -> bool:
        return not self.parents

    def zero_grad(self) -> None:
        self.grad = None

    def item(self) -> float:
        return float(self.value.reshape(-1)[0])

    def __repr__(self) -> str:
        label = self.name or self.op
        return f"Node({label}, shape={self.shape}, requires_grad={self.requires_grad})"


def constant(value, dtype=None) -> Node:
    return Node(np.asarray(value, dtype=dtype))


def parameter(value: np.ndarray, name: Optional[str] = None) -> Node:
    return Node(np.asarray(value), requires_grad=True, name=name)


def make_node(value: np.ndarray, op: str, parents: Sequence[Node], backward: BackwardFn) -> Node:
    """Record an op result; it needs a gradient iff any input does."""
    requires_grad = any(p.requires_grad for p in parents)
    return Node(
        value,
        requires_grad=requires_grad,
        op=op,
        parents=tuple(parents) if requires_grad else (),
        backward=backward if requires_grad else None,
    )


def _topological_order(root: Node) -> List[Node]:
    """Post-order over nodes needing gradients; iterative so deep unrolled graphs are fine."""
    order: List[Node] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Node) -> None:
    """
    Populate ``grad`` on every node that requires it and is reachable from ``loss``.
    Leaf gradients accumulate across calls until ``zero_grad``.

    Raises:
        ShapeError: the loss is not a scalar
    """
    if loss.value.size != 1:
        raise ShapeError("backward (loss must be scalar)", loss.shape)
    if not loss.requires_grad:
        return
    order = _topological_order(loss)
    for node in order:
        if not node.is_leaf:
            node.grad = None
    seed = np.ones_like(loss.value)
    loss.grad = seed if loss.grad is None or not loss.is_leaf else loss.grad + seed

    for node in reversed(order):
        if node._backward is None or node.grad is None:
            continue
        for parent, grad in zip(node.parents, node._backward(node.grad)):
            if grad is None or not parent.requires_grad:
                continue
            parent.grad = grad if parent.grad is None else parent.grad + grad


def zero_grads(nodes: Iterable[Node]) -> None:
    for node in nodes:
        node.zero_grad()
