"""
Differentiable primitives.

Each function computes its forward value with numpy and registers the matching
backward rule through `make_node`. Broadcasting follows numpy; gradients are
summed back onto the broadcast operand's shape.
"""

from typing import Optional, Sequence

import numpy as np
from scipy.special import log_softmax as _log_softmax

from .exceptions import ShapeMismatch
from .tensor import Tensor, as_tensor, make_node


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(op, a.shape, b.shape) from None


# ---- elementwise -------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b, dtype=as_tensor(a).dtype)
    _broadcast_shape("add", a, b)
    return make_node(a.value + b.value, (a, b),
                     lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b, dtype=as_tensor(a).dtype)
    _broadcast_shape("sub", a, b)
    return make_node(a.value - b.value, (a, b),
                     lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)), "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b, dtype=as_tensor(a).dtype)
    _broadcast_shape("mul", a, b)
    return make_node(a.value * b.value, (a, b),
                     lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)), "mul")


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0
    return make_node(np.where(mask, a.value, 0).astype(a.dtype), (a,), lambda g: (g * mask,), "relu")


def maximum(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise max; ties send the gradient to `a`."""
    if a.shape != b.shape:
        raise ShapeMismatch("maximum", a.shape, b.shape)
    pick_a = a.value >= b.value
    return make_node(np.where(pick_a, a.value, b.value), (a, b),
                     lambda g: (g * pick_a, g * ~pick_a), "maximum")


def exp(a: Tensor) -> Tensor:
    value = np.exp(a.value)
    return make_node(value, (a,), lambda g: (g * value,), "exp")


def log(a: Tensor) -> Tensor:
    return make_node(np.log(a.value), (a,), lambda g: (g / a.value,), "log")


# ---- linear algebra and shape ----------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """(..., k) @ (k, m) -> (..., m)."""
    if b.ndim != 2 or a.ndim < 1 or a.shape[-1] != b.shape[0]:
        raise ShapeMismatch("matmul", a.shape, b.shape)
    k, m = b.shape

    def rule(g):
        grad_a = g @ b.value.T
        grad_b = a.value.reshape(-1, k).T @ g.reshape(-1, m)
        return grad_a, grad_b

    return make_node(a.value @ b.value, (a, b), rule, "matmul")


def reshape(a: Tensor, shape) -> Tensor:
    try:
        value = a.value.reshape(shape)
    except ValueError:
        raise ShapeMismatch("reshape", a.shape, tuple(shape)) from None
    return make_node(value, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def transpose(a: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    axes = tuple(reversed(range(a.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))
    return make_node(np.transpose(a.value, axes), (a,), lambda g: (np.transpose(g, inverse),), "transpose")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    try:
        value = np.concatenate([t.value for t in tensors], axis=axis)
    except ValueError:
        raise ShapeMismatch("concat", tensors[0].shape, tensors[-1].shape) from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return make_node(value, tensors, lambda g: tuple(np.split(g, bounds, axis=axis)), "concat")


def slice_axis(a: Tensor, start: int, stop: int, axis: int = 0) -> Tensor:
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)

    def rule(g):
        grad = np.zeros_like(a.value)
        grad[index] = g
        return (grad,)

    return make_node(a.value[index], (a,), rule, "slice")


def gather_rows(a: Tensor, indices) -> Tensor:
    """a[indices] along the first axis; repeated indices accumulate their gradients."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= a.shape[0]):
        raise ShapeMismatch("gather_rows", a.shape, indices.shape)

    def rule(g):
        grad = np.zeros_like(a.value)
        np.add.at(grad, indices, g)
        return (grad,)

    return make_node(a.value[indices], (a,), rule, "gather_rows")


def pick(a: Tensor, index: int) -> Tensor:
    """Single element of a flat tensor, as shape ()."""
    if a.ndim != 1 or not 0 <= index < a.shape[0]:
        raise ShapeMismatch("pick", a.shape, (index,))

    def rule(g):
        grad = np.zeros_like(a.value)
        grad[index] = np.reshape(g, ())
        return (grad,)

    return make_node(a.value[index], (a,), rule, "pick")


# ---- reductions -------------------------------------------------------------------


def reduce_sum(a: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    value = a.value.sum(axis=axis, keepdims=keepdims)

    def rule(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return make_node(value, (a,), rule, "reduce_sum")


def segment_sum(values: Tensor, segments, n_segments: int) -> Tensor:
    """Rows of `values` summed into `n_segments` buckets given per-row bucket ids."""
    segments = np.asarray(segments, dtype=np.int64)
    if segments.shape[0] != values.shape[0]:
        raise ShapeMismatch("segment_sum", values.shape, segments.shape)
    out = np.zeros((n_segments,) + values.shape[1:], dtype=values.dtype)
    np.add.at(out, segments, values.value)
    return make_node(out, (values,), lambda g: (g[segments],), "segment_sum")


def masked_segment_softmax(scores: Tensor, segments, n_segments: int, mask=None) -> Tensor:
    """
    Softmax of `scores` (rows, heads) within each segment, independently per head.

    Rows whose `mask` entry is False get probability 0 and no gradient. A segment
    with a single unmasked row gives exactly 1.0 there.
    """
    segments = np.asarray(segments, dtype=np.int64)
    if scores.ndim != 2 or segments.shape[0] != scores.shape[0]:
        raise ShapeMismatch("masked_segment_softmax", scores.shape, segments.shape)
    keep = np.ones(scores.shape[0], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    keep = keep[:, None]

    masked = np.where(keep, scores.value, -np.inf)
    peak = np.full((n_segments, scores.shape[1]), -np.inf, dtype=scores.dtype)
    np.maximum.at(peak, segments, masked)
    peak = np.where(np.isfinite(peak), peak, 0)
    weights = np.where(keep, np.exp(masked - peak[segments]), 0).astype(scores.dtype)
    totals = np.zeros_like(peak)
    np.add.at(totals, segments, weights)
    totals = np.where(totals > 0, totals, 1)
    probs = weights / totals[segments]

    def rule(g):
        inner = np.zeros_like(peak)
        np.add.at(inner, segments, g * probs)
        return (probs * (g - inner[segments]),)

    return make_node(probs, (scores,), rule, "masked_segment_softmax")


def log_softmax(a: Tensor) -> Tensor:
    """Log-probabilities over a flat logit vector."""
    if a.ndim != 1:
        raise ShapeMismatch("log_softmax", a.shape, (a.size,))
    value = _log_softmax(a.value).astype(a.dtype)
    probs = np.exp(value)
    return make_node(value, (a,), lambda g: (g - probs * g.sum(),), "log_softmax")
