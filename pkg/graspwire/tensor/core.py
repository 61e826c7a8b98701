# MIT License
#
# Copyright (c) 2021 The graspwire developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

import threading
import contextlib
from collections import namedtuple

import numpy as np

from ..errors import Error
from ..errors import ShapeError
from ..utils import format_shape

FLOAT = np.float32

Node = namedtuple('Node', ['kind', 'inputs', 'output'])

_state = threading.local()


def is_grad_enabled():
    return getattr(_state, 'grad_enabled', True)


@contextlib.contextmanager
def no_grad():
    """Evaluate without recording operations for the current thread."""
    previous = is_grad_enabled()
    _state.grad_enabled = False

    try:
        yield
    finally:
        _state.grad_enabled = previous


def _unbroadcast(grad, shape):
    """Sum `grad` back down to `shape` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)

    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)

    return grad


def as_tensor(value):
    if isinstance(value, Tensor):
        return value

    return Tensor(value)


class Tensor(object):
    """
    A dense float32 array with optional reverse-mode gradient.

    Tensors created by operations remember their inputs and a backward
    function while gradient recording is enabled. Calling
    :meth:`backward` on a scalar result populates :attr:`grad` on every
    leaf tensor created with ``requires_grad=True``.
    """

    def __init__(self, data, requires_grad=False):
        if isinstance(data, Tensor):
            raise TypeError('Expected array data, but got a Tensor.')

        self._data = np.asarray(data, dtype=FLOAT)
        self._requires_grad = bool(requires_grad)
        self._grad = None
        self._kind = 'leaf'
        self._parents = ()
        self._backward = None

    @classmethod
    def _from_op(cls, data, kind, parents, backward):
        out = cls(data)
        parents = tuple(parents)

        if is_grad_enabled() and any(p.requires_grad for p in parents):
            out._requires_grad = True
            out._kind = kind
            out._parents = parents
            out._backward = backward

        return out

    @property
    def data(self):
        """The underlying ``numpy.ndarray`` (float32)."""
        return self._data

    @property
    def shape(self):
        return self._data.shape

    @property
    def ndim(self):
        return self._data.ndim

    @property
    def size(self):
        return self._data.size

    @property
    def requires_grad(self):
        return self._requires_grad

    @property
    def grad(self):
        """Accumulated gradient, or ``None`` before any backward pass."""
        return self._grad

    @property
    def kind(self):
        """Operation kind that produced this tensor (``'leaf'`` for inputs)."""
        return self._kind

    @property
    def parents(self):
        return self._parents

    @property
    def is_leaf(self):
        return self._backward is None

    def zero_grad(self):
        self._grad = None

    def detach(self):
        return Tensor(self._data)

    def numpy(self):
        return self._data

    def item(self):
        if self._data.size != 1:
            raise ShapeError(
                'Expected a single element, but got shape {}.'.format(
                    format_shape(self.shape)))

        return float(self._data.reshape(()))

    def __repr__(self):
        return 'Tensor(shape={}, kind={}, requires_grad={})'.format(
            self.shape, self._kind, self._requires_grad)

    def __len__(self):
        return self.shape[0]

    def backward(self, grad=None):
        """
        Back-propagate from this tensor.

        Without `grad` the tensor must hold exactly one element.
        """
        if grad is None:
            if self._data.size != 1:
                raise ShapeError(
                    'backward() needs a scalar loss, but got shape {}.'.format(
                        format_shape(self.shape)))

            grad = np.ones_like(self._data)
        else:
            grad = np.asarray(grad, dtype=FLOAT).reshape(self.shape)

        if not self._requires_grad:
            raise Error('The tensor does not require a gradient.')

        order = topological_order(self)
        grads = {id(self): grad}

        for node in reversed(order):
            node_grad = grads.pop(id(node), None)

            if node_grad is None:
                continue

            if node.is_leaf:
                if node._grad is None:
                    node._grad = node_grad.astype(FLOAT, copy=True)
                else:
                    node._grad = node._grad + node_grad
                continue

            input_grads = node._backward(node_grad)

            for parent, parent_grad in zip(node._parents, input_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue

                parent_grad = np.asarray(parent_grad, dtype=FLOAT)

                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + parent_grad
                else:
                    grads[id(parent)] = parent_grad

    # -- elementwise arithmetic ------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        a, b = self, other

        def backward(g):
            return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

        return Tensor._from_op(a.data + b.data, 'add', (a, b), backward)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_tensor(other)
        a, b = self, other

        def backward(g):
            return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

        return Tensor._from_op(a.data - b.data, 'sub', (a, b), backward)

    def __rsub__(self, other):
        return as_tensor(other).__sub__(self)

    def __mul__(self, other):
        other = as_tensor(other)
        a, b = self, other

        def backward(g):
            return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

        return Tensor._from_op(a.data * b.data, 'mul', (a, b), backward)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        a, b = self, other

        def backward(g):
            return (
                _unbroadcast(g / b.data, a.shape),
                _unbroadcast(-g * a.data / (b.data * b.data), b.shape)
            )

        return Tensor._from_op(a.data / b.data, 'div', (a, b), backward)

    def __rtruediv__(self, other):
        return as_tensor(other).__truediv__(self)

    def __neg__(self):
        def backward(g):
            return (-g,)

        return Tensor._from_op(-self.data, 'neg', (self,), backward)

    def __pow__(self, exponent):
        if isinstance(exponent, Tensor):
            raise TypeError('Only scalar exponents are supported.')

        exponent = float(exponent)
        x = self

        def backward(g):
            return (g * exponent * np.power(x.data, exponent - 1.0),)

        return Tensor._from_op(np.power(x.data, exponent), 'pow', (x,), backward)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        x = self

        def backward(g):
            out = np.zeros_like(x.data)
            np.add.at(out, index, g)
            return (out,)

        return Tensor._from_op(x.data[index], 'getitem', (x,), backward)

    # -- unary -----------------------------------------------------------

    def exp(self):
        out_data = np.exp(self.data)

        def backward(g):
            return (g * out_data,)

        return Tensor._from_op(out_data, 'exp', (self,), backward)

    def log(self):
        x = self

        def backward(g):
            return (g / x.data,)

        return Tensor._from_op(np.log(x.data), 'log', (x,), backward)

    def abs(self):
        x = self

        def backward(g):
            return (g * np.sign(x.data),)

        return Tensor._from_op(np.abs(x.data), 'abs', (x,), backward)

    def clamp_min(self, minimum):
        x = self

        def backward(g):
            return (g * (x.data > minimum),)

        return Tensor._from_op(np.maximum(x.data, minimum), 'clamp_min', (x,), backward)

    # -- reductions and shape ------------------------------------------

    def sum(self, axis=None, keepdims=False):
        x = self

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)

            return (np.broadcast_to(g, x.shape),)

        out = np.sum(x.data, axis=axis, keepdims=keepdims)
        return Tensor._from_op(out, 'sum', (x,), backward)

    def mean(self, axis=None, keepdims=False):
        if axis is None:
            count = self.size
        elif isinstance(axis, tuple):
            count = int(np.prod([self.shape[a] for a in axis]))
        else:
            count = self.shape[axis]

        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])

        x = self

        def backward(g):
            return (g.reshape(x.shape),)

        return Tensor._from_op(x.data.reshape(shape), 'reshape', (x,), backward)

    def transpose(self, *axes):
        x = self
        inverse = np.argsort(axes)

        def backward(g):
            return (g.transpose(inverse),)

        return Tensor._from_op(x.data.transpose(axes), 'transpose', (x,), backward)


def matmul(a, b):
    a = as_tensor(a)
    b = as_tensor(b)

    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(
            'Cannot multiply {} by {}.'.format(
                format_shape(a.shape), format_shape(b.shape)))

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return Tensor._from_op(a.data @ b.data, 'matmul', (a, b), backward)


def topological_order(root):
    """Every node reachable from `root`, inputs before the nodes using them."""
    order = []
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
            if id(parent) not in visited:
                stack.append((parent, False))

    return order


def computation_record(root):
    """The recorded operations leading to `root` as a list of :class:`Node`."""
    return [
        Node(node.kind, node.parents, node)
        for node in topological_order(root)
        if not node.is_leaf
    ]
