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

import logging
import math
from collections import OrderedDict

import numpy as np

from ..errors import Error
from .core import FLOAT
from .core import Tensor
from . import ops

LOGGER = logging.getLogger(__name__)

INIT_STD = 0.02


def init_normal(rng, shape, std=INIT_STD):
    return Tensor(rng.normal(0.0, std, size=shape).astype(FLOAT), requires_grad=True)


def init_zeros(shape):
    return Tensor(np.zeros(shape, dtype=FLOAT), requires_grad=True)


def he_gain(slope=0.0):
    """Gain that keeps activations at unit scale through a LeakyReLU of `slope`."""
    return math.sqrt(2.0 / (1.0 + slope * slope))


def runtime_scale(gain, fan_in):
    if gain is None:
        return None

    if gain <= 0 or fan_in <= 0:
        raise Error(
            'Expected a positive gain and fan-in, but got {} and {}.'.format(gain, fan_in))

    return gain / (math.sqrt(fan_in) * INIT_STD)


class Module(object):
    """
    A container of named parameters and child modules.

    Parameters and children are kept in assignment order, which is the
    order :meth:`named_parameters` walks them and therefore the order
    checkpoints store them in.
    """

    def __init__(self):
        self._parameters = OrderedDict()
        self._children = OrderedDict()
        self._training = True

    def register_parameter(self, name, tensor):
        self._parameters[name] = tensor
        return tensor

    def register_module(self, name, module):
        self._children[name] = module
        return module

    def named_parameters(self, prefix=''):
        for name, tensor in self._parameters.items():
            yield prefix + name, tensor

        for name, child in self._children.items():
            for item in child.named_parameters(prefix + name + '.'):
                yield item

    def parameters(self):
        return [tensor for _, tensor in self.named_parameters()]

    def modules(self):
        yield self

        for child in self._children.values():
            for module in child.modules():
                yield module

    @property
    def training(self):
        return self._training

    def train(self, mode=True):
        for module in self.modules():
            module._training = mode

        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for tensor in self.parameters():
            tensor.zero_grad()

    def parameter_count(self):
        return sum(tensor.size for tensor in self.parameters())

    def state_arrays(self):
        return [tensor.data for tensor in self.parameters()]

    def load_arrays(self, arrays):
        """Replace every parameter with the matching array from `arrays`."""
        params = self.parameters()

        if len(arrays) != len(params):
            raise Error(
                'Expected {} parameter arrays, but got {}.'.format(
                    len(params), len(arrays)))

        for tensor, array in zip(params, arrays):
            array = np.asarray(array, dtype=FLOAT)

            if array.shape != tensor.shape:
                raise Error(
                    'Expected a parameter of shape {}, but got {}.'.format(
                        tensor.shape, array.shape))

            tensor._data = array.copy()
            tensor.zero_grad()

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError


def _scaled(weight, scale):
    return weight if scale is None else weight * scale


class Conv2d(Module):
    """
    2-D convolution.

    With `gain` the stored weights, still drawn from N(0, 0.02), are
    multiplied at run time so the effective weights have standard
    deviation ``gain / sqrt(fan_in)``.
    """

    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding=0, rng=None,
                 gain=None):
        Module.__init__(self)
        rng = rng if rng is not None else np.random.default_rng()
        self.stride = stride
        self.padding = padding
        self.scale = runtime_scale(gain, in_channels * kernel_size * kernel_size)
        self.weight = self.register_parameter(
            'weight', init_normal(rng, (out_channels, in_channels, kernel_size, kernel_size)))
        self.bias = self.register_parameter('bias', init_zeros((out_channels,)))

    def forward(self, x):
        return ops.conv2d(x, _scaled(self.weight, self.scale), self.bias, self.stride, self.padding)


class ConvTranspose2d(Module):
    """Transposed 2-D convolution; `gain` works as for :class:`Conv2d`."""

    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding=0, rng=None,
                 gain=None):
        Module.__init__(self)
        rng = rng if rng is not None else np.random.default_rng()
        self.stride = stride
        self.padding = padding
        # each output pixel sees kernel_size / stride taps along each axis
        self.scale = runtime_scale(
            gain, in_channels * kernel_size * kernel_size / float(stride * stride))
        self.weight = self.register_parameter(
            'weight', init_normal(rng, (in_channels, out_channels, kernel_size, kernel_size)))
        self.bias = self.register_parameter('bias', init_zeros((out_channels,)))

    def forward(self, x):
        return ops.conv2d_transpose(
            x, _scaled(self.weight, self.scale), self.bias, self.stride, self.padding)


class Linear(Module):

    def __init__(self, in_features, out_features, rng=None):
        Module.__init__(self)
        rng = rng if rng is not None else np.random.default_rng()
        self.weight = self.register_parameter('weight', init_normal(rng, (in_features, out_features)))
        self.bias = self.register_parameter('bias', init_zeros((out_features,)))

    def forward(self, x):
        return x @ self.weight + self.bias


class ResidualBlock(Module):
    """Two size-preserving 3×3 convolutions with LeakyReLU between them and an additive skip."""

    def __init__(self, channels, rng=None, slope=0.2):
        Module.__init__(self)
        self.slope = slope
        self.conv1 = self.register_module('conv1', Conv2d(channels, channels, 3, 1, 1, rng=rng))
        self.conv2 = self.register_module('conv2', Conv2d(channels, channels, 3, 1, 1, rng=rng))

    def forward(self, x):
        return x + self.conv2(ops.leaky_relu(self.conv1(x), self.slope))
