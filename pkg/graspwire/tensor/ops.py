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
Differentiable operations on :class:`~graspwire.tensor.core.Tensor`.

Every backward function receives the gradient of the output and returns
one gradient per input, in input order (``None`` for constant inputs).
Image operations accept ``C×H×W`` or ``N×C×H×W`` data and return the
same rank they were given.
"""

import numpy as np

from ..errors import Error
from ..errors import ShapeError
from ..utils import format_shape
from .core import FLOAT
from .core import Tensor
from .core import as_tensor

# largest float32 strictly below one
_BELOW_ONE = np.nextafter(FLOAT(1.0), FLOAT(0.0))


def _batched(data):
    if data.ndim == 3:
        return data[None], True
    if data.ndim == 4:
        return data, False

    raise ShapeError(
        'Expected a C×H×W or N×C×H×W tensor, but got shape {}.'.format(
            format_shape(data.shape)))


def output_extent(extent, kernel_size, stride, padding):
    return (extent + 2 * padding - kernel_size) // stride + 1


def transpose_output_extent(extent, kernel_size, stride, padding):
    return (extent - 1) * stride - 2 * padding + kernel_size


def conv2d(x, weight, bias=None, stride=1, padding=0):
    """
    2-D cross-correlation of `x` with `weight` (``C_out×C_in×k×k``).

    Output extents are ``floor((H + 2·padding − k) / stride) + 1``.
    """
    xd, squeeze = _batched(x.data)
    wd = weight.data

    if wd.ndim != 4:
        raise ShapeError(
            'Expected a C_out×C_in×k×k kernel, but got shape {}.'.format(
                format_shape(wd.shape)))

    n, c, h, w = xd.shape
    out_channels, in_channels, kh, kw = wd.shape

    if in_channels != c:
        raise ShapeError(
            'Kernel expects {} input channels, but the input has {}.'.format(
                in_channels, c))

    if stride < 1:
        raise ShapeError('Expected stride >= 1, but got {}.'.format(stride))

    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise ShapeError(
            'Kernel {}×{} does not fit input {}×{} with padding {}.'.format(
                kh, kw, h, w, padding))

    ho = output_extent(h, kh, stride, padding)
    wo = output_extent(w, kw, stride, padding)
    xp = np.pad(xd, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else xd

    def window(i, j):
        return (
            slice(None), slice(None),
            slice(i, i + stride * (ho - 1) + 1, stride),
            slice(j, j + stride * (wo - 1) + 1, stride)
        )

    out = np.zeros((n, ho, wo, out_channels), dtype=FLOAT)

    for i in range(kh):
        for j in range(kw):
            out += np.tensordot(xp[window(i, j)], wd[:, :, i, j], axes=([1], [1]))

    out = out.transpose(0, 3, 1, 2)

    if bias is not None:
        out = out + bias.data.reshape(1, -1, 1, 1)

    def backward(g):
        if squeeze:
            g = g[None]

        g_nhwo = g.transpose(0, 2, 3, 1)
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(wd)

        for i in range(kh):
            for j in range(kw):
                index = window(i, j)
                gw[:, :, i, j] = np.tensordot(g_nhwo, xp[index], axes=([0, 1, 2], [0, 2, 3]))
                gxp[index] += np.tensordot(g_nhwo, wd[:, :, i, j], axes=([3], [0])).transpose(0, 3, 1, 2)

        gx = gxp[:, :, padding:padding + h, padding:padding + w]

        if squeeze:
            gx = gx[0]

        gb = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return gx, gw, gb

    if squeeze:
        out = out[0]

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor._from_op(np.ascontiguousarray(out, dtype=FLOAT), 'conv2d', parents, backward)


def conv2d_transpose(x, weight, bias=None, stride=1, padding=0):
    """
    Transposed convolution with a ``C_in×C_out×k×k`` kernel.

    Output extents are ``(H − 1)·stride − 2·padding + k``; the exact
    adjoint of :func:`conv2d` under the same kernel, stride and padding.
    """
    xd, squeeze = _batched(x.data)
    wd = weight.data

    if wd.ndim != 4:
        raise ShapeError(
            'Expected a C_in×C_out×k×k kernel, but got shape {}.'.format(
                format_shape(wd.shape)))

    n, c, h, w = xd.shape
    in_channels, out_channels, kh, kw = wd.shape

    if in_channels != c:
        raise ShapeError(
            'Kernel expects {} input channels, but the input has {}.'.format(
                in_channels, c))

    if stride < 1:
        raise ShapeError('Expected stride >= 1, but got {}.'.format(stride))

    hf = (h - 1) * stride + kh
    wf = (w - 1) * stride + kw
    ho = hf - 2 * padding
    wo = wf - 2 * padding

    if ho < 1 or wo < 1:
        raise ShapeError(
            'Padding {} leaves no output for input {}×{}.'.format(padding, h, w))

    def window(i, j):
        return (
            slice(None), slice(None),
            slice(i, i + stride * (h - 1) + 1, stride),
            slice(j, j + stride * (w - 1) + 1, stride)
        )

    full = np.zeros((n, out_channels, hf, wf), dtype=FLOAT)

    for i in range(kh):
        for j in range(kw):
            full[window(i, j)] += np.tensordot(xd, wd[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)

    out = full[:, :, padding:padding + ho, padding:padding + wo]

    if bias is not None:
        out = out + bias.data.reshape(1, -1, 1, 1)

    def backward(g):
        if squeeze:
            g = g[None]

        gfull = np.zeros((n, out_channels, hf, wf), dtype=FLOAT)
        gfull[:, :, padding:padding + ho, padding:padding + wo] = g
        gx = np.zeros_like(xd)
        gw = np.zeros_like(wd)

        for i in range(kh):
            for j in range(kw):
                gs = gfull[window(i, j)]
                gx += np.tensordot(gs, wd[:, :, i, j], axes=([1], [1])).transpose(0, 3, 1, 2)
                gw[:, :, i, j] = np.tensordot(xd, gs, axes=([0, 2, 3], [0, 2, 3]))

        if squeeze:
            gx = gx[0]

        gb = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return gx, gw, gb

    if squeeze:
        out = out[0]

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor._from_op(np.ascontiguousarray(out, dtype=FLOAT), 'conv2d_transpose', parents, backward)


def leaky_relu(x, slope=0.2):
    x = as_tensor(x)
    positive = x.data >= 0
    scale = np.where(positive, FLOAT(1.0), FLOAT(slope)).astype(FLOAT)

    def backward(g):
        return (g * scale,)

    return Tensor._from_op(x.data * scale, 'leaky_relu', (x,), backward)


def tanh(x):
    x = as_tensor(x)
    out = np.clip(np.tanh(x.data), -_BELOW_ONE, _BELOW_ONE)

    def backward(g):
        return (g * (1.0 - out * out),)

    return Tensor._from_op(out, 'tanh', (x,), backward)


def activation(x, kind, slope=0.2):
    """Apply ``'leaky_relu'`` or ``'tanh'`` elementwise."""
    if kind == 'leaky_relu':
        return leaky_relu(x, slope)
    if kind == 'tanh':
        return tanh(x)

    raise Error(
        "Expected activation 'leaky_relu' or 'tanh', but got {!r}.".format(kind))


def sigmoid(x):
    x = as_tensor(x)
    z = np.exp(-np.abs(x.data))
    out = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z)).astype(FLOAT)

    def backward(g):
        return (g * out * (1.0 - out),)

    return Tensor._from_op(out, 'sigmoid', (x,), backward)


def dropout(x, rate, mode='train', seed=None):
    """
    Zero each element with probability `rate` in train mode and scale the
    survivors by ``1 / (1 − rate)``. Eval mode is the identity.

    `seed` is an integer or a ``numpy.random.Generator``.
    """
    if not 0.0 <= rate < 1.0:
        raise Error('Expected a dropout rate in [0, 1), but got {}.'.format(rate))

    if mode not in ('train', 'eval'):
        raise Error("Expected mode 'train' or 'eval', but got {!r}.".format(mode))

    if mode == 'eval' or rate == 0.0:
        return x

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    mask = (rng.random(x.shape) >= rate).astype(FLOAT) / FLOAT(1.0 - rate)

    def backward(g):
        return (g * mask,)

    return Tensor._from_op(x.data * mask, 'dropout', (x,), backward)


def pad_edge(x, height, width):
    """Grow the trailing rows and columns to `height`×`width` by edge replication."""
    h, w = x.shape[-2:]

    if height < h or width < w:
        raise ShapeError(
            'Cannot pad {}×{} down to {}×{}.'.format(h, w, height, width))

    if (height, width) == (h, w):
        return x

    pad = [(0, 0)] * (x.ndim - 2) + [(0, height - h), (0, width - w)]
    out = np.pad(x.data, pad, mode='edge')

    def backward(g):
        rows = g[..., :h, :].copy()
        rows[..., h - 1, :] += g[..., h:, :].sum(axis=-2)
        gx = rows[..., :w].copy()
        gx[..., w - 1] += rows[..., w:].sum(axis=-1)
        return (gx,)

    return Tensor._from_op(out, 'pad_edge', (x,), backward)


def avg_pool2(x):
    """2×2 average pooling with stride 2; an odd trailing row/column is dropped."""
    h, w = x.shape[-2:]
    h2, w2 = h // 2, w // 2

    if h2 < 1 or w2 < 1:
        raise ShapeError('Cannot pool a {}×{} map.'.format(h, w))

    lead = x.shape[:-2]
    cropped = x.data[..., :2 * h2, :2 * w2]
    out = cropped.reshape(lead + (h2, 2, w2, 2)).mean(axis=(-3, -1))

    def backward(g):
        gx = np.zeros(x.shape, dtype=FLOAT)
        spread = np.repeat(np.repeat(g, 2, axis=-2), 2, axis=-1) * 0.25
        gx[..., :2 * h2, :2 * w2] = spread
        return (gx,)

    return Tensor._from_op(out.astype(FLOAT), 'avg_pool2', (x,), backward)


def crop_and_resize(features, boxes, size=7):
    """
    Bilinear crop of a ``C×H×W`` feature map into ``K×C×size×size``.

    `boxes` is a ``K×4`` array of ``(x1, y1, x2, y2)`` in feature-map
    coordinates. Samples sit at the centers of a ``size×size`` grid over
    each box and are clamped to the map.
    """
    fd = features.data

    if fd.ndim != 3:
        raise ShapeError(
            'Expected a C×H×W feature map, but got shape {}.'.format(
                format_shape(fd.shape)))

    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    channels, h, w = fd.shape
    steps = (np.arange(size) + 0.5) / size

    ys = boxes[:, 1:2] + (boxes[:, 3:4] - boxes[:, 1:2]) * steps
    xs = boxes[:, 0:1] + (boxes[:, 2:3] - boxes[:, 0:1]) * steps
    ys = np.clip(ys, 0.0, h - 1)
    xs = np.clip(xs, 0.0, w - 1)

    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0).astype(FLOAT)[:, :, None]
    wx = (xs - x0).astype(FLOAT)[:, None, :]

    corners = [
        (y0[:, :, None], x0[:, None, :], (1 - wy) * (1 - wx)),
        (y0[:, :, None], x1[:, None, :], (1 - wy) * wx),
        (y1[:, :, None], x0[:, None, :], wy * (1 - wx)),
        (y1[:, :, None], x1[:, None, :], wy * wx),
    ]

    out = np.zeros((channels,) + (boxes.shape[0], size, size), dtype=FLOAT)

    for yy, xx, weight in corners:
        yy, xx = np.broadcast_arrays(yy, xx)
        out += fd[:, yy, xx] * weight

    def backward(g):
        g = g.transpose(1, 0, 2, 3)
        gf = np.zeros_like(fd)

        for yy, xx, weight in corners:
            yy, xx = np.broadcast_arrays(yy, xx)
            np.add.at(gf, (slice(None), yy, xx), g * weight)

        return (gf,)

    out = np.ascontiguousarray(out.transpose(1, 0, 2, 3))
    return Tensor._from_op(out, 'crop_and_resize', (features,), backward)


def log_softmax(x, axis=-1):
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)

    return Tensor._from_op(out.astype(FLOAT), 'log_softmax', (x,), backward)


def softmax(values, axis=-1):
    """Plain numpy softmax for inference paths."""
    values = np.asarray(values, dtype=np.float64)
    shifted = values - values.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def bce_with_logits(logits, targets):
    """Elementwise binary cross-entropy of sigmoid(`logits`) against `targets`."""
    logits = as_tensor(logits)
    t = np.broadcast_to(np.asarray(targets, dtype=FLOAT), logits.shape)
    z = logits.data
    out = np.maximum(z, 0) - z * t + np.log1p(np.exp(-np.abs(z)))

    def backward(g):
        p = np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))
        return (g * (p - t),)

    return Tensor._from_op(out.astype(FLOAT), 'bce_with_logits', (logits,), backward)


def cross_entropy(logits, targets):
    """Per-row cross-entropy of ``K×C`` logits against integer class `targets`."""
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)

    if logits.ndim != 2 or logits.shape[0] != targets.shape[0]:
        raise ShapeError(
            'Expected {} rows of logits, but got shape {}.'.format(
                targets.shape[0], format_shape(logits.shape)))

    return -log_softmax(logits, axis=1)[np.arange(targets.shape[0]), targets]


def smooth_l1(x, y, beta=1.0):
    """Elementwise smooth-L1; ``beta=0`` gives plain L1."""
    x = as_tensor(x)
    y = as_tensor(y)
    d = x.data - y.data

    if x.shape != y.shape:
        raise ShapeError(
            'Cannot compare {} with {}.'.format(
                format_shape(x.shape), format_shape(y.shape)))

    ad = np.abs(d)

    if beta > 0:
        quadratic = ad < beta
        out = np.where(quadratic, 0.5 * d * d / beta, ad - 0.5 * beta)
        slope = np.where(quadratic, d / beta, np.sign(d))
    else:
        out = ad
        slope = np.sign(d)

    slope = slope.astype(FLOAT)

    def backward(g):
        return g * slope, -g * slope

    return Tensor._from_op(out.astype(FLOAT), 'smooth_l1', (x, y), backward)
