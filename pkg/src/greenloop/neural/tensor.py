"""Minimal reverse-mode autodiff over float64 numpy arrays.

Every op is a free function that accepts `Tensor`s and/or plain arrays.
When at least one input is a Tensor the op records a node with a backward
closure (gradients accumulate into `.grad`); with plain-array inputs it
computes the value directly, so the exact same forward code doubles as a
graph-free fast path (used for target networks and greedy evaluation).

Backward closures pass `owned=True` to `_accumulate` only for gradient
arrays they freshly allocated; shared views (e.g. from reshape) are copied
on first accumulation so no tensor ever aliases another's gradient buffer.
"""
from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every reachable tensor's .grad."""
        order = _topo_order(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    # Operator sugar; the implementations live in the free functions below.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def _topo_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, emitted = stack.pop()
        if emitted:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def _is_tensor(x) -> bool:
    return isinstance(x, Tensor)


def _value(x) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def _accumulate(t: Tensor, g: np.ndarray, owned: bool = False) -> None:
    if t.grad is None:
        t.grad = g if owned else g.copy()
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    keep = tuple(
        axis for axis, dim in enumerate(shape) if dim == 1 and g.shape[axis] != 1
    )
    if keep:
        g = g.sum(axis=keep, keepdims=True)
    return g


def add(a, b):
    av, bv = _value(a), _value(b)
    out = av + bv
    if not (_is_tensor(a) or _is_tensor(b)):
        return out

    def backward(g):
        if _is_tensor(a):
            ga = _unbroadcast(g, av.shape)
            _accumulate(a, ga, owned=ga is not g)
        if _is_tensor(b):
            gb = _unbroadcast(g, bv.shape)
            _accumulate(b, gb, owned=gb is not g)

    return Tensor(out, tuple(x for x in (a, b) if _is_tensor(x)), backward)


def sub(a, b):
    av, bv = _value(a), _value(b)
    out = av - bv
    if not (_is_tensor(a) or _is_tensor(b)):
        return out

    def backward(g):
        if _is_tensor(a):
            ga = _unbroadcast(g, av.shape)
            _accumulate(a, ga, owned=ga is not g)
        if _is_tensor(b):
            _accumulate(b, _unbroadcast(-g, bv.shape), owned=True)

    return Tensor(out, tuple(x for x in (a, b) if _is_tensor(x)), backward)


def mul(a, b):
    av, bv = _value(a), _value(b)
    out = av * bv
    if not (_is_tensor(a) or _is_tensor(b)):
        return out

    def backward(g):
        if _is_tensor(a):
            _accumulate(a, _unbroadcast(g * bv, av.shape), owned=True)
        if _is_tensor(b):
            _accumulate(b, _unbroadcast(g * av, bv.shape), owned=True)

    return Tensor(out, tuple(x for x in (a, b) if _is_tensor(x)), backward)


def _matmul_values(av: np.ndarray, bv: np.ndarray) -> np.ndarray:
    # Stacked operand against a plain weight matrix: one flat GEMM beats
    # numpy's per-item batched loop.
    if bv.ndim == 2 and av.ndim > 2:
        flat = av.reshape(-1, av.shape[-1]) @ bv
        return flat.reshape(av.shape[:-1] + (bv.shape[1],))
    return av @ bv


def matmul(a, b):
    av, bv = _value(a), _value(b)
    out = _matmul_values(av, bv)
    if not (_is_tensor(a) or _is_tensor(b)):
        return out

    def backward(g):
        if _is_tensor(a):
            if bv.ndim == 2:
                ga = (g.reshape(-1, bv.shape[1]) @ bv.T).reshape(av.shape)
            else:
                ga = g @ np.swapaxes(bv, -1, -2)
                if ga.shape != av.shape:
                    ga = _unbroadcast(ga, av.shape)
            _accumulate(a, ga, owned=True)
        if _is_tensor(b):
            if bv.ndim == 2:
                gb = av.reshape(-1, av.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            else:
                gb = np.swapaxes(av, -1, -2) @ g
                if gb.shape != bv.shape:
                    gb = _unbroadcast(gb, bv.shape)
            _accumulate(b, gb, owned=True)

    return Tensor(out, tuple(x for x in (a, b) if _is_tensor(x)), backward)


def _sigmoid_values(x: np.ndarray) -> np.ndarray:
    # exp(-x) overflowing to inf still yields the correct 0.0 limit.
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def sigmoid(x):
    xv = _value(x)
    out = _sigmoid_values(xv)
    if not _is_tensor(x):
        return out

    def backward(g):
        _accumulate(x, g * out * (1.0 - out), owned=True)

    return Tensor(out, (x,), backward)


def _softmax_values(x: np.ndarray, axis: int) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def softmax(x, axis: int = -1):
    xv = _value(x)
    out = _softmax_values(xv, axis)
    if not _is_tensor(x):
        return out

    def backward(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        _accumulate(x, out * (g - inner), owned=True)

    return Tensor(out, (x,), backward)


def logsumexp(x, axis: int = -1):
    xv = _value(x)
    m = xv.max(axis=axis, keepdims=True)
    e = np.exp(xv - m)
    sums = e.sum(axis=axis, keepdims=True)
    out = np.squeeze(m + np.log(sums), axis=axis)
    if not _is_tensor(x):
        return out

    def backward(g):
        _accumulate(x, (e / sums) * np.expand_dims(g, axis), owned=True)

    return Tensor(out, (x,), backward)


def mean(x, axis: int | None = None, keepdims: bool = False):
    xv = _value(x)
    out = xv.mean(axis=axis, keepdims=keepdims)
    if not _is_tensor(x):
        return out

    def backward(g):
        if axis is None:
            _accumulate(x, np.broadcast_to(g / xv.size, xv.shape).copy(), owned=True)
        else:
            n = xv.shape[axis]
            ge = g if keepdims else np.expand_dims(g, axis)
            _accumulate(x, np.broadcast_to(ge / n, xv.shape).copy(), owned=True)

    return Tensor(out, (x,), backward)


def total(x, axis: int | None = None, keepdims: bool = False):
    """Summation (named to avoid shadowing builtins)."""
    xv = _value(x)
    out = xv.sum(axis=axis, keepdims=keepdims)
    if not _is_tensor(x):
        return out

    def backward(g):
        if axis is None:
            _accumulate(x, np.broadcast_to(g, xv.shape).copy(), owned=True)
        else:
            ge = g if keepdims else np.expand_dims(g, axis)
            _accumulate(x, np.broadcast_to(ge, xv.shape).copy(), owned=True)

    return Tensor(out, (x,), backward)


def reshape(x, shape: tuple):
    xv = _value(x)
    out = xv.reshape(shape)
    if not _is_tensor(x):
        return out

    def backward(g):
        _accumulate(x, g.reshape(xv.shape))

    return Tensor(out, (x,), backward)


def swapaxes(x, axis1: int, axis2: int):
    xv = _value(x)
    out = np.swapaxes(xv, axis1, axis2)
    if not _is_tensor(x):
        return out

    def backward(g):
        _accumulate(x, np.swapaxes(g, axis1, axis2))

    return Tensor(out, (x,), backward)


def index_select(x, axis: int, indices):
    """Gather slices along an axis with a fixed integer index array."""
    idx = np.asarray(indices, dtype=np.intp)
    xv = _value(x)
    out = np.take(xv, idx, axis=axis)
    if not _is_tensor(x):
        return out

    def backward(g):
        gf = np.zeros_like(xv)
        np.add.at(np.moveaxis(gf, axis, 0), idx, np.moveaxis(g, axis, 0))
        _accumulate(x, gf, owned=True)

    return Tensor(out, (x,), backward)


def take_per_row(x, indices):
    """out[i] = x[i, indices[i]] for a (B, A) input and (B,) index vector."""
    idx = np.asarray(indices, dtype=np.intp)
    xv = _value(x)
    rows = np.arange(xv.shape[0])
    out = xv[rows, idx]
    if not _is_tensor(x):
        return out

    def backward(g):
        gf = np.zeros_like(xv)
        np.add.at(gf, (rows, idx), g)
        _accumulate(x, gf, owned=True)

    return Tensor(out, (x,), backward)
