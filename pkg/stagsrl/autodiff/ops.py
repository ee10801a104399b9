"""
Differentiable tensor operations.

Shapes are checked strictly: the only broadcast is adding a bias vector to
every row of a matrix (or every position of a higher-rank tensor).
"""
from typing import Optional, Sequence, Union

import numpy as np

from .graph import Node, constant, make_node
from ..errors import ShapeError

Operand = Union[Node, np.ndarray, float]


def as_node(x: Operand) -> Node:
    return x if isinstance(x, Node) else constant(x)


# ---------- elementwise ----------

def add(a: Operand, b: Operand) -> Node:
    a, b = as_node(a), as_node(b)
    if a.shape == b.shape:
        return make_node(a.value + b.value, "add", (a, b), lambda g: (g, g))
    if b.value.ndim == 1 and a.value.ndim >= 1 and a.shape[-1] == b.shape[0]:
        lead = tuple(range(a.value.ndim - 1))
        return make_node(a.value + b.value, "add", (a, b), lambda g: (g, g.sum(axis=lead)))
    raise ShapeError("add", a.shape, b.shape)


def sub(a: Operand, b: Operand) -> Node:
    a, b = as_node(a), as_node(b)
    if a.shape != b.shape:
        raise ShapeError("sub", a.shape, b.shape)
    return make_node(a.value - b.value, "sub", (a, b), lambda g: (g, -g))


def mul(a: Operand, b: Operand) -> Node:
    a, b = as_node(a), as_node(b)
    if a.shape != b.shape:
        raise ShapeError("mul", a.shape, b.shape)
    av, bv = a.value, b.value
    return make_node(av * bv, "mul", (a, b), lambda g: (g * bv, g * av))


def scale(a: Operand, factor: float) -> Node:
    a = as_node(a)
    return make_node(a.value * factor, "scale", (a,), lambda g: (g * factor,))


def one_minus(a: Operand) -> Node:
    a = as_node(a)
    return make_node(1.0 - a.value, "one_minus", (a,), lambda g: (-g,))


def sigmoid(a: Operand) -> Node:
    a = as_node(a)
    s = 0.5 * (1.0 + np.tanh(0.5 * a.value))
    return make_node(s, "sigmoid", (a,), lambda g: (g * s * (1.0 - s),))


def tanh(a: Operand) -> Node:
    a = as_node(a)
    t = np.tanh(a.value)
    return make_node(t, "tanh", (a,), lambda g: (g * (1.0 - t * t),))


def relu(a: Operand) -> Node:
    a = as_node(a)
    mask = a.value > 0
    return make_node(np.where(mask, a.value, 0).astype(a.dtype), "relu", (a,), lambda g: (g * mask,))


# ---------- linear algebra / structure ----------

def matmul(a: Operand, b: Operand) -> Node:
    """(..., k) @ (k, m) -> (..., m)"""
    a, b = as_node(a), as_node(b)
    if b.value.ndim != 2 or a.value.ndim < 1 or a.shape[-1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    av, bv = a.value, b.value
    k, m = bv.shape

    def grad(g):
        ga = g @ bv.T
        gb = av.reshape(-1, k).T @ g.reshape(-1, m)
        return ga, gb

    return make_node(av @ bv, "matmul", (a, b), grad)


def concat(nodes: Sequence[Operand], axis: int = -1) -> Node:
    nodes = [as_node(n) for n in nodes]
    if not nodes:
        raise ShapeError("concat (no inputs)")
    ndim = nodes[0].value.ndim
    ax = axis % ndim if ndim else 0
    for n in nodes[1:]:
        if n.value.ndim != ndim or any(
            n.shape[d] != nodes[0].shape[d] for d in range(ndim) if d != ax
        ):
            raise ShapeError("concat", nodes[0].shape, n.shape)
    sizes = [n.shape[ax] for n in nodes]
    cuts = np.cumsum(sizes)[:-1]

    def grad(g):
        return np.split(g, cuts, axis=ax)

    return make_node(np.concatenate([n.value for n in nodes], axis=ax), "concat", nodes, grad)


def slice_(a: Operand, index) -> Node:
    """Basic (non-fancy) indexing; gradients scatter back into a zero tensor."""
    a = as_node(a)
    try:
        value = np.array(a.value[index])
    except IndexError as exc:
        raise ShapeError(f"slice {index!r} ({exc})", a.shape) from None
    shape, dtype = a.shape, a.dtype

    def grad(g):
        full = np.zeros(shape, dtype=dtype)
        full[index] = g
        return (full,)

    return make_node(value, "slice", (a,), grad)


def reshape(a: Operand, shape) -> Node:
    a = as_node(a)
    original = a.shape
    try:
        value = a.value.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", original, tuple(np.atleast_1d(shape))) from None
    return make_node(value, "reshape", (a,), lambda g: (g.reshape(original),))


def embedding_lookup(table: Operand, indices) -> Node:
    """Rows of ``table`` selected by an integer array of any shape."""
    table = as_node(table)
    idx = np.asarray(indices, dtype=np.int64)
    if table.value.ndim != 2:
        raise ShapeError("embedding_lookup (table must be 2-D)", table.shape)
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise ShapeError("embedding_lookup (index out of range)", table.shape, idx.shape)
    shape, dtype = table.shape, table.dtype

    def grad(g):
        full = np.zeros(shape, dtype=dtype)
        np.add.at(full, idx, g)
        return (full,)

    return make_node(table.value[idx], "embedding_lookup", (table,), grad)


# ---------- reductions ----------

def sum_(a: Operand) -> Node:
    a = as_node(a)
    shape = a.shape
    return make_node(np.array(a.value.sum(), dtype=a.dtype), "sum", (a,),
                     lambda g: (np.full(shape, g, dtype=g.dtype),))


def mean(a: Operand) -> Node:
    a = as_node(a)
    return scale(sum_(a), 1.0 / max(a.value.size, 1))


def max_over_axis(a: Operand, axis: int = -1) -> Node:
    """Max along ``axis``; the gradient goes to the first maximal entry."""
    a = as_node(a)
    ax = axis % a.value.ndim
    arg = np.expand_dims(np.argmax(a.value, axis=ax), ax)
    value = np.take_along_axis(a.value, arg, axis=ax).squeeze(ax)
    shape, dtype = a.shape, a.dtype

    def grad(g):
        full = np.zeros(shape, dtype=dtype)
        np.put_along_axis(full, arg, np.expand_dims(g, ax), axis=ax)
        return (full,)

    return make_node(value, "max_over_axis", (a,), grad)


def softmax(a: Operand, axis: int = -1) -> Node:
    a = as_node(a)
    shifted = a.value - a.value.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def grad(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return make_node(s, "softmax", (a,), grad)


def softmax_values(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Forward-only stable softmax for inference."""
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def cross_entropy(logits: Operand, targets, weights: Optional[np.ndarray] = None) -> Node:
    """
    Weighted mean of per-row negative log-likelihoods, via log-sum-exp.
    ``logits`` is (N, C) with integer ``targets`` (N,), or (C,) with one target.
    Rows with weight 0 (padding) do not contribute.
    """
    logits = as_node(logits)
    lv = logits.value
    single = lv.ndim == 1
    if single:
        lv = lv[None, :]
    t = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    if lv.ndim != 2 or t.shape != (lv.shape[0],):
        raise ShapeError("cross_entropy", logits.shape, t.shape)
    if t.size and (t.min() < 0 or t.max() >= lv.shape[1]):
        raise ShapeError("cross_entropy (target out of range)", logits.shape, t.shape)
    w = np.ones(lv.shape[0], dtype=lv.dtype) if weights is None else np.asarray(weights, dtype=lv.dtype)
    if w.shape != (lv.shape[0],):
        raise ShapeError("cross_entropy (weights)", logits.shape, w.shape)
    total_w = w.sum()
    norm = 1.0 / total_w if total_w > 0 else 0.0

    m = lv.max(axis=1, keepdims=True)
    logsumexp = m[:, 0] + np.log(np.exp(lv - m).sum(axis=1))
    rows = np.arange(lv.shape[0])
    losses = logsumexp - lv[rows, t]
    value = np.array((w * losses).sum() * norm, dtype=lv.dtype)

    def grad(g):
        p = softmax_values(lv, axis=1)
        p[rows, t] -= 1.0
        full = p * (w * norm)[:, None] * g
        return (full[0] if single else full,)

    return make_node(value, "cross_entropy", (logits,), grad)


# ---------- regularization / convolution ----------

def dropout_mask(shape, rate: float, rng: np.random.Generator, dtype=np.float64) -> np.ndarray:
    """Inverted-dropout mask: kept entries are scaled by 1/(1-rate)."""
    keep = rng.random(shape) >= rate
    return (keep / (1.0 - rate)).astype(dtype)


def dropout(a: Operand, rate: float, rng: Optional[np.random.Generator], train: bool = True) -> Node:
    """Identity at inference or when ``rate`` is 0."""
    a = as_node(a)
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return a
    return mul(a, constant(dropout_mask(a.shape, rate, rng, a.dtype)))


def conv1d(x: Operand, filters: Operand, window: int) -> Node:
    """
    Valid 1-D convolution.
    x: (N, L, C) with L >= window; filters: (window * C, F) -> (N, L - window + 1, F)
    """
    x, filters = as_node(x), as_node(filters)
    if x.value.ndim != 3 or filters.value.ndim != 2:
        raise ShapeError("conv1d", x.shape, filters.shape)
    n, length, channels = x.shape
    if length < window or filters.shape[0] != window * channels:
        raise ShapeError("conv1d", x.shape, filters.shape)
    positions = length - window + 1
    xv, fv = x.value, filters.value
    windows = np.stack([xv[:, j:j + positions, :] for j in range(window)], axis=2)
    flat = windows.reshape(n, positions, window * channels)
    f_out = fv.shape[1]

    def grad(g):
        g_filters = flat.reshape(-1, window * channels).T @ g.reshape(-1, f_out)
        g_windows = (g @ fv.T).reshape(n, positions, window, channels)
        g_x = np.zeros_like(xv)
        for j in range(window):
            g_x[:, j:j + positions, :] += g_windows[:, :, j, :]
        return g_x, g_filters

    return make_node(flat @ fv, "conv1d", (x, filters), grad)
