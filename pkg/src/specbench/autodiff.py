"""Dense float64 tensors with tape-based reverse-mode differentiation.

Primitives compute with numpy and, while a tape is active (see
:func:`recording`), append a backward rule to it. Tapes are recorded in
execution order, which is already a topological order, so
:func:`backward` is a single reverse sweep. A tape and its tensors
belong to one worker; nothing here is shared mutable state apart from
the thread-local active-tape stack.
"""
from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from typing import Callable, Sequence

import numpy as np

from .errors import NonScalarLoss, ShapeMismatch

__all__ = [
    "Tensor",
    "Tape",
    "recording",
    "backward",
    "add", "sub", "mul", "div", "neg", "matmul",
    "relu", "tanh", "exp", "log", "sqrt", "power", "absval", "softplus", "lgamma",
    "softmax", "layer_norm", "mean", "tsum", "concat", "tslice", "reshape",
    "transpose", "broadcast_to", "embedding",
]


class Tensor:
    """A shaped view over a contiguous float64 numpy array."""

    __slots__ = ("data",)

    def __init__(self, data):
        self.data = np.ascontiguousarray(data, dtype=np.float64)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"

    # Operator sugar; scalars and arrays are lifted to constant tensors.
    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, _lift(other))


def _lift(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(np.asarray(value, dtype=np.float64))


class Tape:
    """Ordered record of primitive applications (op, inputs, output, rule)."""

    __slots__ = ("records",)

    def __init__(self):
        # Each record: (op name, output, inputs, backward) where backward
        # maps the output gradient to input gradients (None = no flow).
        self.records: list[tuple[str, Tensor, tuple[Tensor, ...], Callable]] = []

    def __len__(self) -> int:
        return len(self.records)


_ACTIVE = threading.local()


def _stack() -> list[Tape]:
    if not hasattr(_ACTIVE, "stack"):
        _ACTIVE.stack = []
    return _ACTIVE.stack


@contextmanager
def recording(tape: Tape):
    """Make ``tape`` the active recording target within the block."""
    stack = _stack()
    stack.append(tape)
    try:
        yield tape
    finally:
        stack.pop()


def _emit(
    out: Tensor, inputs: tuple[Tensor, ...], backward_rule: Callable, op: str = ""
) -> Tensor:
    stack = _stack()
    if stack:
        stack[-1].records.append((op, out, inputs, backward_rule))
    return out


def backward(tape: Tape, loss: Tensor, params: Sequence[Tensor]) -> list[np.ndarray]:
    """Gradients of a scalar ``loss`` with respect to ``params``.

    Parameters the loss does not reach get zero gradients.
    """
    if loss.data.size != 1:
        raise NonScalarLoss(f"loss has shape {loss.shape}, expected a scalar")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for _, out, inputs, rule in reversed(tape.records):
        g_out = grads.get(id(out))
        if g_out is None:
            continue
        for tensor, g_in in zip(inputs, rule(g_out)):
            if g_in is None:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + g_in
            else:
                grads[key] = g_in
    return [grads.get(id(p), np.zeros_like(p.data)) for p in params]


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _binary(a: Tensor, b: Tensor, forward, rule) -> Tensor:
    try:
        out = Tensor(forward(a.data, b.data))
    except ValueError as exc:
        raise ShapeMismatch(f"operands {a.shape} and {b.shape}: {exc}") from None
    return _emit(out, (a, b), rule)


# -- arithmetic ----------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    return _binary(
        a, b, np.add,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    return _binary(
        a, b, np.subtract,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    return _binary(
        a, b, np.multiply,
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def div(a: Tensor, b: Tensor) -> Tensor:
    return _binary(
        a, b, np.divide,
        lambda g: (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        ),
    )


def neg(a: Tensor) -> Tensor:
    return _emit(Tensor(-a.data), (a,), lambda g: (-g,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatch("matmul operands must have ndim >= 2")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul {a.shape} @ {b.shape}: inner dims differ")

    if b.ndim == 2:
        # Dense-layer case: flatten leading dims into single GEMMs instead
        # of numpy's per-row batched path (and avoid materializing a
        # (batch, K, N) gradient that would then be summed down to (K, N)).
        lead = a.shape[:-1]
        k, n = b.shape
        a2 = a.data.reshape(-1, k)
        out = Tensor((a2 @ b.data).reshape(*lead, n))

        def rule(g):
            g2 = g.reshape(-1, n)
            return (g2 @ b.data.T).reshape(a.shape), a2.T @ g2

        return _emit(out, (a, b), rule)

    try:
        out = Tensor(a.data @ b.data)
    except ValueError as exc:
        raise ShapeMismatch(f"matmul {a.shape} @ {b.shape}: {exc}") from None

    def rule(g):
        ga = _unbroadcast(g @ b.data.swapaxes(-1, -2), a.shape)
        gb = _unbroadcast(a.data.swapaxes(-1, -2) @ g, b.shape)
        return ga, gb

    return _emit(out, (a, b), rule)


# -- elementwise nonlinearities -------------------------------------------------

def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _emit(Tensor(np.where(mask, a.data, 0.0)), (a,), lambda g: (g * mask,), op="relu")


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)
    return _emit(Tensor(t), (a,), lambda g: (g * (1.0 - t * t),))


def exp(a: Tensor) -> Tensor:
    e = np.exp(a.data)
    return _emit(Tensor(e), (a,), lambda g: (g * e,))


def log(a: Tensor) -> Tensor:
    return _emit(Tensor(np.log(a.data)), (a,), lambda g: (g / a.data,))


def sqrt(a: Tensor) -> Tensor:
    s = np.sqrt(a.data)
    return _emit(Tensor(s), (a,), lambda g: (g * 0.5 / s,))


def power(a: Tensor, exponent: float) -> Tensor:
    out = a.data ** exponent
    return _emit(
        Tensor(out), (a,),
        lambda g: (g * exponent * a.data ** (exponent - 1.0),),
    )


def absval(a: Tensor) -> Tensor:
    sign = np.sign(a.data)
    return _emit(Tensor(np.abs(a.data)), (a,), lambda g: (g * sign,), op="absval")


def softplus(a: Tensor) -> Tensor:
    x = a.data
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    sig = 1.0 / (1.0 + np.exp(-x))
    return _emit(Tensor(out), (a,), lambda g: (g * sig,))


# Lanczos approximation (g=7, n=9) for log-gamma on x > 0.
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])


def _lgamma_array(x: np.ndarray) -> np.ndarray:
    z = x - 1.0
    series = np.full_like(z, _LANCZOS_COEF[0])
    for i in range(1, len(_LANCZOS_COEF)):
        series = series + _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * np.log(t) - t + np.log(series)


def _digamma_array(x: np.ndarray) -> np.ndarray:
    # Recurrence up to x >= 6, then the asymptotic series.
    x = np.array(x, dtype=np.float64, copy=True)
    acc = np.zeros_like(x)
    while np.any(x < 6.0):
        small = x < 6.0
        acc[small] -= 1.0 / x[small]
        x[small] += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    return acc + np.log(x) - 0.5 * inv - inv2 * (
        1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0)
    )


def lgamma(a: Tensor) -> Tensor:
    """Log-gamma for positive inputs; gradient is the digamma function."""
    out = _lgamma_array(a.data)
    return _emit(Tensor(out), (a,), lambda g: (g * _digamma_array(a.data),))


# -- normalization and reductions ------------------------------------------------

def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def rule(g):
        inner = (g * s).sum(axis=axis, keepdims=True)
        return (s * (g - inner),)

    return _emit(Tensor(s), (a,), rule)


def layer_norm(a: Tensor, axis: int = -1, eps: float = 1e-5) -> Tensor:
    mu = a.data.mean(axis=axis, keepdims=True)
    centered = a.data - mu
    var = (centered * centered).mean(axis=axis, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    y = centered * inv_std
    n = a.data.shape[axis]

    def rule(g):
        g_mean = g.mean(axis=axis, keepdims=True)
        gy_mean = (g * y).mean(axis=axis, keepdims=True)
        return (inv_std * (g - g_mean - y * gy_mean),)

    del n
    return _emit(Tensor(y), (a,), rule)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.data.size if axis is None else np.prod(
        [a.data.shape[ax] for ax in np.atleast_1d(axis)]
    )

    def rule(g):
        g = np.asarray(g)
        if not keepdims and axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape) / count,)

    return _emit(Tensor(out), (a,), rule)


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def rule(g):
        g = np.asarray(g)
        if not keepdims and axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _emit(Tensor(out), (a,), rule)


# -- shape manipulation -----------------------------------------------------------

def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def rule(g):
        return tuple(np.split(g, splits, axis=axis))

    return _emit(out, tuple(tensors), rule)


def tslice(a: Tensor, key) -> Tensor:
    """Basic (non-repeating) numpy slice of a tensor."""
    out = Tensor(a.data[key])

    def rule(g):
        full = np.zeros_like(a.data)
        full[key] += g
        return (full,)

    return _emit(out, (a,), rule)


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape))
    return _emit(out, (a,), lambda g: (g.reshape(a.shape),))


def transpose(a: Tensor, axes=None) -> Tensor:
    out = Tensor(a.data.transpose(axes))
    inverse = None if axes is None else np.argsort(axes)
    return _emit(out, (a,), lambda g: (g.transpose(inverse),))


def broadcast_to(a: Tensor, shape) -> Tensor:
    out = Tensor(np.broadcast_to(a.data, shape))
    return _emit(out, (a,), lambda g: (_unbroadcast(g, a.shape),))


def embedding(table: Tensor, indices: np.ndarray) -> Tensor:
    """Row lookup ``table[indices]``; gradients scatter-add into the table."""
    indices = np.asarray(indices)
    out = Tensor(table.data[indices])

    def rule(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, indices, g)
        return (gt,)

    return _emit(out, (table,), rule)
