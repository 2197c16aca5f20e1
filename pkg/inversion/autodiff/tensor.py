"""
Dense Tensor with reverse-mode automatic differentiation.

Every op computes its value with numpy and, when any input requires a
gradient, records a ``Node`` holding the inputs and a closure that maps the
output gradient to input gradients. ``backward`` orders the reachable nodes
by creation id (inputs are always created before their consumers), walks
them once in reverse and frees them unless the graph is retained.

Broadcasting is limited to scalars; everything else goes through explicit
``reshape``/``pad``/``bias_add`` ops.
"""
from __future__ import annotations

import itertools
import logging
import threading
from contextlib import contextmanager
from numbers import Number
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from inversion import app_config
from inversion.errors import (
    ContractError,
    EmptyInputError,
    GraphConsumedError,
    NonFiniteError,
    ShapeError,
)

logger = logging.getLogger(__name__)

DEFAULT_DTYPE = np.float32
"""Training precision; the gradient-check harness builds float64 tensors."""

ELEMENTWISE_KINDS = ('add', 'sub', 'mul', 'relu', 'sigmoid', 'tanh', 'scale')

Operand = Union['Tensor', float, int]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_node_ids = itertools.count()
_grad_mode = threading.local()


def is_grad_enabled() -> bool:
    """Whether ops currently record graph nodes on this thread."""
    return getattr(_grad_mode, 'enabled', True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disables graph recording on the current thread (inference)."""
    previous = is_grad_enabled()
    _grad_mode.enabled = False
    try:
        yield
    finally:
        _grad_mode.enabled = previous


######################################################################
# GRAPH
######################################################################
class Node:
    """One recorded op: its inputs and how to push gradients back to them."""

    __slots__ = ('node_id', 'op', 'inputs', 'backward_fn', 'consumed')

    def __init__(
            self,
            op: str,
            inputs: Tuple['Tensor', ...],
            backward_fn: BackwardFn
    ) -> None:
        self.node_id = next(_node_ids)
        self.op = op
        self.inputs = inputs
        self.backward_fn: Optional[BackwardFn] = backward_fn
        self.consumed = False

    def release(self) -> None:
        """Drops saved values so the graph can be collected."""
        self.inputs = ()
        self.backward_fn = None
        self.consumed = True


class ComputationGraph:
    """Topologically ordered view of the nodes reachable from a root tensor.

    ``order`` lists non-leaf tensors by ascending node id, so every node's
    inputs precede it.
    """

    def __init__(self, root: 'Tensor', order: List['Tensor']) -> None:
        self.root = root
        self.order = order

    @classmethod
    def trace(cls, root: 'Tensor') -> 'ComputationGraph':
        """Collects every recorded tensor reachable from ``root``.

        Raises:
            GraphConsumedError: If any reachable node was already freed.
        """
        seen: Dict[int, 'Tensor'] = {}
        stack = [root]
        while stack:
            tensor = stack.pop()
            node = tensor.node
            if node is None or id(tensor) in seen:
                continue
            if node.consumed:
                raise GraphConsumedError(
                    f"Graph through op '{node.op}' was already consumed by a "
                    f"previous backward pass; pass retain_graph=True to reuse it."
                )
            seen[id(tensor)] = tensor
            stack.extend(node.inputs)
        order = sorted(seen.values(), key=lambda t: t.node.node_id)
        return cls(root, order)

    def __len__(self) -> int:
        return len(self.order)

    def backward(self, retain_graph: bool = False) -> None:
        """Propagates d(root)/d(leaf) into ``grad`` of every leaf that
        requires it; gradients from repeated uses add up."""
        root = self.root
        pending: Dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
        if root.node is None:
            if root.requires_grad:
                _accumulate_leaf(root, pending.pop(id(root)))
            return
        for tensor in reversed(self.order):
            grad = pending.pop(id(tensor), None)
            node = tensor.node
            if grad is not None:
                input_grads = node.backward_fn(grad)
                for source, source_grad in zip(node.inputs, input_grads):
                    if source_grad is None or not source.requires_grad:
                        continue
                    if source.node is None:
                        _accumulate_leaf(source, source_grad)
                    elif id(source) in pending:
                        pending[id(source)] = pending[id(source)] + source_grad
                    else:
                        pending[id(source)] = source_grad
            if not retain_graph:
                node.release()


def _accumulate_leaf(leaf: 'Tensor', grad: np.ndarray) -> None:
    grad = np.asarray(grad, dtype=leaf.data.dtype).reshape(leaf.data.shape)
    if leaf.grad is None:
        leaf.grad = grad.copy()
    else:
        leaf.grad = leaf.grad + grad


######################################################################
# TENSOR
######################################################################
class Tensor:
    """n-dimensional value participating in a reverse-mode graph.

    Attributes:
        data: Contiguous row-major numpy array (float32 unless a float64
            array is passed in).
        requires_grad: Whether gradients flow into this tensor.
        grad: Accumulated gradient of the last backward pass (leaves only).
        node: The op that produced this tensor, or None for leaves.
    """

    __array_priority__ = 100

    def __init__(
            self,
            data,
            requires_grad: bool = False,
            dtype=None
    ) -> None:
        array = np.asarray(data, dtype=dtype)
        if dtype is None and array.dtype not in (np.float32, np.float64):
            array = array.astype(DEFAULT_DTYPE)
        self.data: np.ndarray = np.ascontiguousarray(array)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.node: Optional[Node] = None

    # --- properties ---
    @property
    def shape(self) -> Tuple[int, ...]:
        """Dimension sizes."""
        return self.data.shape

    @property
    def ndim(self) -> int:
        """Rank of the tensor."""
        return self.data.ndim

    @property
    def size(self) -> int:
        """Element count."""
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        """Element type."""
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        """The underlying array (not a copy)."""
        return self.data

    def item(self) -> float:
        """The value of a one-element tensor as a Python float."""
        return float(self.data.reshape(-1)[0])

    def detach(self) -> 'Tensor':
        """A leaf sharing this tensor's values but no graph history."""
        return Tensor(self.data)

    def zero_grad(self) -> None:
        """Clears the accumulated gradient."""
        self.grad = None

    def backward(self, retain_graph: bool = False) -> None:
        """See :func:`backward`."""
        backward(self, retain_graph=retain_graph)

    def __repr__(self) -> str:
        return (f"Tensor(shape={self.shape}, dtype={self.dtype}, "
                f"requires_grad={self.requires_grad})")

    # --- operators ---
    def __add__(self, other: Operand) -> 'Tensor':
        return add(self, other)

    def __radd__(self, other: Operand) -> 'Tensor':
        return add(self, other)

    def __sub__(self, other: Operand) -> 'Tensor':
        return sub(self, other)

    def __rsub__(self, other: Operand) -> 'Tensor':
        return add(neg(self), other)

    def __mul__(self, other: Operand) -> 'Tensor':
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other: Operand) -> 'Tensor':
        return self.__mul__(other)

    def __neg__(self) -> 'Tensor':
        return neg(self)

    def __matmul__(self, other: 'Tensor') -> 'Tensor':
        return matmul(self, other)

    def relu(self) -> 'Tensor':
        """Elementwise max(x, 0)."""
        return relu(self)

    def sigmoid(self) -> 'Tensor':
        """Elementwise logistic function."""
        return sigmoid(self)

    def tanh(self) -> 'Tensor':
        """Elementwise hyperbolic tangent."""
        return tanh(self)

    def sum(self) -> 'Tensor':
        """Sum of all elements."""
        return sum_all(self)

    def mean(self) -> 'Tensor':
        """Mean of all elements."""
        return mean_all(self)

    def reshape(self, *shape) -> 'Tensor':
        """Same values, new shape."""
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def record_op(
        op: str,
        value: np.ndarray,
        inputs: Tuple[Tensor, ...],
        backward_fn: BackwardFn
) -> Tensor:
    """Wraps an op result and records its node when gradients are needed."""
    if app_config.debug_checks and not np.all(np.isfinite(value)):
        if all(np.all(np.isfinite(t.data)) for t in inputs):
            raise NonFiniteError(f"Op '{op}' produced NaN/Inf from finite inputs")
    out = Tensor(value, dtype=inputs[0].dtype)
    if is_grad_enabled() and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.node = Node(op, inputs, backward_fn)
    return out


######################################################################
# ELEMENTWISE OPS
######################################################################
def _scalar_operand(a: Tensor, b: Operand, op: str) -> Tuple[Tensor, bool]:
    """Resolves ``b`` to a tensor and tells whether it broadcasts as a scalar."""
    if isinstance(b, Number):
        return Tensor(np.asarray(b, dtype=a.dtype)), True
    if not isinstance(b, Tensor):
        raise ContractError(f"Op '{op}' expects a Tensor or scalar, got {type(b).__name__}")
    if b.shape == a.shape:
        return b, False
    if b.ndim == 0:
        return b, True
    raise ShapeError(
        f"Op '{op}' shape mismatch: {a.shape} vs {b.shape} "
        f"(only exact-match or scalar broadcast is supported)"
    )


def _reduce_to(grad: np.ndarray, broadcast: bool) -> np.ndarray:
    return np.asarray(grad.sum(), dtype=grad.dtype) if broadcast else grad


def add(a: Tensor, b: Operand) -> Tensor:
    """a + b."""
    b_t, broadcast = _scalar_operand(a, b, 'add')

    def backward_fn(grad):
        return grad, _reduce_to(grad, broadcast)

    return record_op('add', a.data + b_t.data, (a, b_t), backward_fn)


def sub(a: Tensor, b: Operand) -> Tensor:
    """a - b."""
    b_t, broadcast = _scalar_operand(a, b, 'sub')

    def backward_fn(grad):
        return grad, _reduce_to(-grad, broadcast)

    return record_op('sub', a.data - b_t.data, (a, b_t), backward_fn)


def mul(a: Tensor, b: Operand) -> Tensor:
    """Elementwise a * b."""
    b_t, broadcast = _scalar_operand(a, b, 'mul')

    def backward_fn(grad):
        return grad * b_t.data, _reduce_to(grad * a.data, broadcast)

    return record_op('mul', a.data * b_t.data, (a, b_t), backward_fn)


def scale(a: Tensor, factor: float) -> Tensor:
    """a * s for a constant Python scalar s."""
    if not isinstance(factor, Number):
        raise ContractError(f"Op 'scale' expects a scalar factor, got {type(factor).__name__}")
    factor = a.data.dtype.type(factor)

    def backward_fn(grad):
        return (grad * factor,)

    return record_op('scale', a.data * factor, (a,), backward_fn)


def neg(a: Tensor) -> Tensor:
    """-a."""
    return record_op('neg', -a.data, (a,), lambda grad: (-grad,))


def relu(a: Tensor) -> Tensor:
    """max(a, 0)."""
    mask = a.data > 0

    def backward_fn(grad):
        return (grad * mask,)

    return record_op('relu', np.where(mask, a.data, 0), (a,), backward_fn)


def sigmoid(a: Tensor) -> Tensor:
    """Logistic function, evaluated through tanh for stability."""
    value = 0.5 * (1.0 + np.tanh(0.5 * a.data))

    def backward_fn(grad):
        return (grad * value * (1.0 - value),)

    return record_op('sigmoid', value, (a,), backward_fn)


def tanh(a: Tensor) -> Tensor:
    """Hyperbolic tangent."""
    value = np.tanh(a.data)

    def backward_fn(grad):
        return (grad * (1.0 - value * value),)

    return record_op('tanh', value, (a,), backward_fn)


def elementwise(
        kind: str,
        a: Tensor,
        b: Optional[Operand] = None
) -> Tensor:
    """Dispatches one of ``ELEMENTWISE_KINDS``.

    Binary kinds (add, sub, mul) take a tensor of identical shape or a
    scalar; ``scale`` takes a Python scalar; unary kinds ignore ``b``.

    Raises:
        ShapeError: If ``b`` is neither scalar nor of ``a``'s shape.
        ContractError: On an unknown kind or missing operand.
    """
    if kind in ('relu', 'sigmoid', 'tanh'):
        return {'relu': relu, 'sigmoid': sigmoid, 'tanh': tanh}[kind](a)
    if kind not in ELEMENTWISE_KINDS:
        raise ContractError(f"Unknown elementwise kind '{kind}'")
    if b is None:
        raise ContractError(f"Elementwise '{kind}' needs a second operand")
    return {'add': add, 'sub': sub, 'mul': mul, 'scale': scale}[kind](a, b)


######################################################################
# LINEAR ALGEBRA AND REDUCTIONS
######################################################################
def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a [p x q] and b [q x r]."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} @ {b.shape}")

    def backward_fn(grad):
        return grad @ b.data.T, a.data.T @ grad

    return record_op('matmul', a.data @ b.data, (a, b), backward_fn)


def bias_add(a: Tensor, bias: Tensor) -> Tensor:
    """Adds a vector along the last axis of ``a`` (the one explicit
    non-scalar broadcast)."""
    if bias.ndim != 1 or a.ndim < 1 or a.shape[-1] != bias.shape[0]:
        raise ShapeError(f"bias_add shape mismatch: {a.shape} + {bias.shape}")
    lead_axes = tuple(range(a.ndim - 1))

    def backward_fn(grad):
        return grad, grad.sum(axis=lead_axes)

    return record_op('bias_add', a.data + bias.data, (a, bias), backward_fn)


def sum_all(a: Tensor) -> Tensor:
    """Sum of every element, as a scalar tensor."""
    shape = a.shape

    def backward_fn(grad):
        return (np.broadcast_to(grad, shape).copy(),)

    return record_op('sum', np.asarray(a.data.sum(), dtype=a.dtype), (a,), backward_fn)


def mean_all(a: Tensor) -> Tensor:
    """Mean of every element, as a scalar tensor."""
    if a.size == 0:
        raise EmptyInputError('mean of an empty tensor')
    shape, count = a.shape, a.size

    def backward_fn(grad):
        return (np.broadcast_to(grad / count, shape).astype(a.dtype),)

    return record_op('mean', np.asarray(a.data.mean(), dtype=a.dtype), (a,), backward_fn)


def mse(pred: Tensor, target: Tensor) -> Tensor:
    """Mean of squared differences over all elements.

    Raises:
        ShapeError: If shapes differ.
        EmptyInputError: If the tensors hold no elements.
    """
    if pred.shape != target.shape:
        raise ShapeError(f"mse shape mismatch: {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise EmptyInputError('mse of empty tensors')
    diff = pred.data - target.data.astype(pred.dtype, copy=False)
    count = diff.size

    def backward_fn(grad):
        g = grad * (2.0 / count) * diff
        return g, -g

    value = np.asarray(np.mean(diff * diff), dtype=pred.dtype)
    return record_op('mse', value, (pred, target), backward_fn)


######################################################################
# STRUCTURAL OPS
######################################################################
def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    """Same values in a new shape (row-major order kept)."""
    shape = tuple(int(s) for s in shape)
    try:
        value = a.data.reshape(shape)
    except ValueError as err:
        raise ShapeError(
            f"cannot reshape {a.shape} to {shape}", original_exception=err
        ) from err
    original = a.shape

    def backward_fn(grad):
        return (grad.reshape(original),)

    return record_op('reshape', value, (a,), backward_fn)


def pad(a: Tensor, widths: Sequence[Tuple[int, int]]) -> Tensor:
    """Zero padding with ``(before, after)`` widths per axis."""
    widths = tuple((int(lo), int(hi)) for lo, hi in widths)
    if len(widths) != a.ndim or any(lo < 0 or hi < 0 for lo, hi in widths):
        raise ShapeError(f"pad widths {widths} invalid for shape {a.shape}")
    crop = tuple(slice(lo, lo + size) for (lo, _), size in zip(widths, a.shape))

    def backward_fn(grad):
        return (grad[crop],)

    return record_op('pad', np.pad(a.data, widths), (a,), backward_fn)


def select(a: Tensor, index: int, axis: int) -> Tensor:
    """The slice at ``index`` along ``axis`` (that axis is removed)."""
    if not -a.shape[axis] <= index < a.shape[axis]:
        raise ShapeError(f"select index {index} out of range for axis {axis} of {a.shape}")
    shape = a.shape

    def backward_fn(grad):
        full = np.zeros(shape, dtype=grad.dtype)
        np.moveaxis(full, axis, 0)[index] = grad
        return (full,)

    return record_op('select', np.take(a.data, index, axis=axis), (a,), backward_fn)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Stacks equally shaped tensors along a new axis."""
    if not tensors:
        raise EmptyInputError('stack of no tensors')
    first = tensors[0].shape
    for tensor in tensors:
        if tensor.shape != first:
            raise ShapeError(f"stack shape mismatch: {first} vs {tensor.shape}")
    count = len(tensors)

    def backward_fn(grad):
        return tuple(np.take(grad, i, axis=axis) for i in range(count))

    value = np.stack([t.data for t in tensors], axis=axis)
    return record_op('stack', value, tuple(tensors), backward_fn)


######################################################################
# BACKWARD
######################################################################
def backward(loss: Tensor, retain_graph: bool = False) -> None:
    """Populates ``grad`` on all leaves that require it.

    Args:
        loss: A one-element tensor at the root of the graph.
        retain_graph: Keep the graph for another pass instead of freeing it.

    Raises:
        ContractError: If ``loss`` is not a scalar.
        GraphConsumedError: If the graph was freed by an earlier pass.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar root, got shape {loss.shape}")
    graph = ComputationGraph.trace(loss)
    logger.debug("Backward through %d nodes", len(graph))
    graph.backward(retain_graph=retain_graph)
