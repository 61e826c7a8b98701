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

import numpy as np

from ..errors import Error
from .core import FLOAT


class AdamState(object):
    """
    First and second moment estimates for a list of parameters.

    :param shapes: parameter shapes, one per parameter
    :param beta1: first-moment decay
    :param beta2: second-moment decay
    :param eps: denominator offset
    """

    def __init__(self, shapes, beta1=0.9, beta2=0.999, eps=1e-8):
        if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
            raise Error(
                'Expected moment decays in [0, 1), but got {} and {}.'.format(
                    beta1, beta2))

        self._m = [np.zeros(shape, dtype=FLOAT) for shape in shapes]
        self._v = [np.zeros(shape, dtype=FLOAT) for shape in shapes]
        self._step = 0
        self._beta1 = beta1
        self._beta2 = beta2
        self._eps = eps

    @property
    def m(self):
        return self._m

    @property
    def v(self):
        return self._v

    @property
    def step(self):
        return self._step

    @property
    def beta1(self):
        return self._beta1

    @property
    def beta2(self):
        return self._beta2

    @property
    def eps(self):
        return self._eps

    def __len__(self):
        return len(self._m)


def adam_step(params, grads, state, lr):
    """
    Apply one bias-corrected Adam update in place.

    `params` are numpy arrays (or tensors' data) and are modified in
    place; `grads` holds one gradient per parameter, ``None`` meaning
    zero. Returns `params`.
    """
    if len(params) != len(grads) or len(params) != len(state):
        raise Error(
            'Expected {} parameters, gradients and moments, but got {}, {} and {}.'.format(
                len(state), len(params), len(grads), len(state)))

    state._step += 1
    t = state._step
    b1 = state._beta1
    b2 = state._beta2
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t

    for index, (param, grad) in enumerate(zip(params, grads)):
        m = state._m[index]
        v = state._v[index]

        if m.shape != param.shape:
            raise Error(
                'Expected a parameter of shape {}, but got {}.'.format(m.shape, param.shape))

        if grad is None:
            grad = np.zeros_like(m)
        else:
            grad = np.asarray(grad, dtype=FLOAT)

            if grad.shape != m.shape:
                raise Error(
                    'Expected a gradient of shape {}, but got {}.'.format(m.shape, grad.shape))

        m *= b1
        m += (1.0 - b1) * grad
        v *= b2
        v += (1.0 - b2) * grad * grad

        m_hat = m / correction1
        v_hat = v / correction2
        param -= (lr * m_hat / (np.sqrt(v_hat) + state._eps)).astype(FLOAT)

    return params


class Adam(object):
    """Adam over a list of tensors, reading their accumulated gradients."""

    def __init__(self, tensors, lr=2e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self._tensors = list(tensors)
        self.lr = lr
        self.state = AdamState([t.shape for t in self._tensors], beta1, beta2, eps)

    def zero_grad(self):
        for tensor in self._tensors:
            tensor.zero_grad()

    def step(self):
        adam_step(
            [t.data for t in self._tensors],
            [t.grad for t in self._tensors],
            self.state,
            self.lr
        )
