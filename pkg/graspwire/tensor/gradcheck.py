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

"""
Central finite-difference gradient checking.

Used by the test suite to confirm every differentiable operation's
backward pass against numeric differentiation.
"""

import numpy as np

from .core import Tensor


def numeric_gradient(fn, arrays, index, eps=1e-3):
    """Central-difference gradient of ``fn(*arrays).sum()`` with respect to ``arrays[index]``."""
    base = [np.array(a, dtype=np.float64) for a in arrays]
    target = base[index]
    grad = np.zeros_like(target)
    flat = target.reshape(-1)
    flat_grad = grad.reshape(-1)

    def evaluate():
        tensors = [Tensor(a) for a in base]
        return float(np.sum(fn(*tensors).data, dtype=np.float64))

    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        plus = evaluate()
        flat[i] = original - eps
        minus = evaluate()
        flat[i] = original
        flat_grad[i] = (plus - minus) / (2.0 * eps)

    return grad


def analytic_gradients(fn, arrays):
    tensors = [Tensor(a, requires_grad=True) for a in arrays]
    fn(*tensors).sum().backward()
    return [
        t.grad if t.grad is not None else np.zeros(t.shape, dtype=np.float32)
        for t in tensors
    ]


def relative_error(analytic, numeric):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denominator = np.linalg.norm(analytic) + np.linalg.norm(numeric)

    if denominator == 0.0:
        return 0.0

    return float(np.linalg.norm(analytic - numeric) / denominator)


def check_gradients(fn, arrays, eps=1e-3, wrt=None):
    """
    Return the largest relative error between analytic and numeric
    gradients of ``fn(*inputs).sum()`` over the inputs listed in `wrt`
    (all inputs by default).
    """
    arrays = [np.asarray(a, dtype=np.float32) for a in arrays]
    wrt = range(len(arrays)) if wrt is None else wrt
    analytic = analytic_gradients(fn, arrays)

    return max(
        relative_error(analytic[i], numeric_gradient(fn, arrays, i, eps))
        for i in wrt
    )
