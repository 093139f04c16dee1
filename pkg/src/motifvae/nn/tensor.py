"""Minimal reverse-mode autodiff on NumPy arrays.

Every op records its parents and a backward closure; ``Tensor.backward``
runs a topological sweep accumulating gradients. Only the ops needed by
the graph networks and losses are implemented, including segment (scatter)
sums for message passing and graph pooling.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np
from scipy import sparse

_GRAD_ENABLED = True


@contextmanager
def no_grad():
    """Disable graph recording (inference mode)."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() needs a scalar output")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is None or node.grad is None:
                continue
            grads = node._backward(node.grad)
            for parent, grad in zip(node._parents, grads):
                if grad is None or not (parent.requires_grad or parent._parents):
                    continue
                if parent.grad is None:
                    parent.grad = np.zeros_like(parent.data)
                parent.grad += grad

    # -- operator sugar ----------------------------------------------------
    def __add__(self, other):
        return add(self, _wrap(other, self.dtype))

    def __radd__(self, other):
        return add(_wrap(other, self.dtype), self)

    def __sub__(self, other):
        return sub(self, _wrap(other, self.dtype))

    def __rsub__(self, other):
        return sub(_wrap(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, _wrap(other, self.dtype))

    def __rmul__(self, other):
        return mul(_wrap(other, self.dtype), self)

    def __truediv__(self, other):
        return div(self, _wrap(other, self.dtype))

    def __neg__(self):
        return mul(self, _wrap(-1.0, self.dtype))

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, grad={'yes' if self.requires_grad else 'no'})"


def parameter(data) -> Tensor:
    return Tensor(np.asarray(data), requires_grad=True)


def constant(data, dtype=None) -> Tensor:
    arr = np.asarray(data)
    if dtype is not None:
        arr = arr.astype(dtype, copy=False)
    return Tensor(arr)


def _wrap(value, dtype) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype))


def _tracked(parents) -> bool:
    return _GRAD_ENABLED and any(p.requires_grad or p._parents for p in parents)


def _make(data, parents, backward) -> Tensor:
    if _tracked(parents):
        return Tensor(data, requires_grad=True, _parents=tuple(parents), _backward=backward)
    return Tensor(data)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# -- arithmetic --------------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data
    return _make(
        out,
        (a, b),
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)),
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.data - b.data
    return _make(
        out,
        (a, b),
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data
    return _make(
        out,
        (a, b),
        lambda g: (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        ),
    )


def div(a: Tensor, b: Tensor) -> Tensor:
    out = a.data / b.data
    return _make(
        out,
        (a, b),
        lambda g: (
            _unbroadcast(g / b.data, a.data.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape),
        ),
    )


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data @ b.data
    return _make(
        out,
        (a, b),
        lambda g: (g @ b.data.T, a.data.T @ g),
    )


def square(a: Tensor) -> Tensor:
    return mul(a, a)


# -- elementwise nonlinearities ----------------------------------------------


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return _make(out, (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    return _make(np.log(a.data), (a,), lambda g: (g / a.data,))


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return _make(out, (a,), lambda g: (g / (2.0 * out),))


def sigmoid(a: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-a.data))
    return _make(out, (a,), lambda g: (g * out * (1.0 - out),))


def leaky_relu(a: Tensor, slope: float = 0.01) -> Tensor:
    factor = np.where(a.data > 0, 1.0, slope)
    return _make(a.data * factor, (a,), lambda g: (g * factor,))


def softplus(a: Tensor) -> Tensor:
    # numerically stable log(1 + exp(x))
    out = np.logaddexp(0.0, a.data)
    sig = 1.0 / (1.0 + np.exp(-a.data))
    return _make(out, (a,), lambda g: (g * sig,))


# -- reductions and shaping ----------------------------------------------------


def tsum(a: Tensor, axis=None, keepdims=False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        expanded = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(expanded, a.data.shape).copy(),)

    return _make(out, (a,), backward)


def tmean(a: Tensor, axis=None, keepdims=False) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), _wrap(1.0 / count, a.dtype))


def reshape(a: Tensor, shape) -> Tensor:
    old = a.data.shape
    return _make(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),))


def transpose2d(a: Tensor) -> Tensor:
    return _make(a.data.T, (a,), lambda g: (g.T,))


def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    datas = [t.data for t in tensors]
    out = np.concatenate(datas, axis=axis)
    sizes = [d.shape[axis] for d in datas]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return _make(out, tuple(tensors), backward)


# -- indexing ----------------------------------------------------------------


def gather_rows(a: Tensor, idx: np.ndarray) -> Tensor:
    idx = np.asarray(idx, dtype=np.int64)
    out = a.data[idx]

    def backward(g):
        grad = np.zeros_like(a.data)
        np.add.at(grad, idx, g)
        return (grad,)

    return _make(out, (a,), backward)


def take_per_row(a: Tensor, cols: np.ndarray) -> Tensor:
    """out[i] = a[i, cols[i]] for a 2-D tensor."""
    cols = np.asarray(cols, dtype=np.int64)
    rows = np.arange(a.data.shape[0])
    out = a.data[rows, cols]

    def backward(g):
        grad = np.zeros_like(a.data)
        grad[rows, cols] = g
        return (grad,)

    return _make(out, (a,), backward)


def segment_sum(a: Tensor, segments: np.ndarray, num_segments: int) -> Tensor:
    """Rows of ``a`` summed into ``num_segments`` buckets.

    Uses a sparse incidence matrix so the forward pass stays in C; the
    backward pass is a plain row gather.
    """
    segments = np.asarray(segments, dtype=np.int64)
    n_rows = a.data.shape[0]
    if a.data.ndim == 1:
        out = np.zeros(num_segments, dtype=a.data.dtype)
        np.add.at(out, segments, a.data)
    else:
        matrix = sparse.csr_matrix(
            (np.ones(n_rows, dtype=a.data.dtype), (segments, np.arange(n_rows))),
            shape=(num_segments, n_rows),
        )
        out = matrix @ a.data

    def backward(g):
        return (g[segments],)

    return _make(out, (a,), backward)


def segment_mean(a: Tensor, segments: np.ndarray, num_segments: int) -> Tensor:
    segments = np.asarray(segments, dtype=np.int64)
    counts = np.bincount(segments, minlength=num_segments).astype(a.data.dtype)
    counts = np.maximum(counts, 1.0)
    total = segment_sum(a, segments, num_segments)
    if a.data.ndim == 1:
        return mul(total, constant(1.0 / counts))
    return mul(total, constant((1.0 / counts)[:, None]))


def segment_max_data(values: np.ndarray, segments: np.ndarray, num_segments: int) -> np.ndarray:
    """Plain-array per-segment max (used as a constant logsumexp shift)."""
    out = np.full(num_segments, -np.inf, dtype=values.dtype)
    np.maximum.at(out, segments, values)
    return out


def segment_logsumexp(a: Tensor, segments: np.ndarray, num_segments: int) -> Tensor:
    """Per-segment logsumexp of a 1-D score tensor; -inf entries drop out."""
    segments = np.asarray(segments, dtype=np.int64)
    shift = segment_max_data(a.data, segments, num_segments)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    shifted = sub(a, constant(shift[segments]))
    # exp(-inf) underflows to exactly 0, masking illegal entries
    summed = segment_sum(exp(shifted), segments, num_segments)
    return add(log(summed), constant(shift))


def logsumexp_rows(a: Tensor) -> Tensor:
    """Row-wise logsumexp of a 2-D tensor with possible -inf entries."""
    shift = a.data.max(axis=1)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    shifted = sub(a, constant(shift[:, None]))
    summed = tsum(exp(shifted), axis=1)
    return add(log(summed), constant(shift))


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis of a 2-D tensor, then apply an affine map."""
    d = x.data.shape[-1]
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out = xhat * gain.data + bias.data

    def backward(g):
        dxhat = g * gain.data
        dx = (
            inv
            / d
            * (
                d * dxhat
                - dxhat.sum(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
            )
        )
        dgain = (g * xhat).sum(axis=tuple(range(g.ndim - 1)))
        dbias = g.sum(axis=tuple(range(g.ndim - 1)))
        return (dx, dgain, dbias)

    return _make(out, (x, gain, bias), backward)
