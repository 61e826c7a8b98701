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
Differentiable codec training objectives.

Images enter as normalized ``N×3×H×W`` tensors in ``[-1, 1]`` and are
mapped to the ``[0, 255]`` pixel scale before the structural terms so
the stabilizing constants match :mod:`graspwire.metrics`.
"""

import numpy as np

from .errors import Error
from .errors import ShapeError
from .utils import format_shape
from .metrics import MsSsimParams
from .metrics import check_scales
from .tensor import Tensor
from .tensor import as_tensor
from .tensor import ops

_EPS = 1e-6


def _gaussian_taps(params):
    coords = np.arange(params.window_size, dtype=np.float64) - (params.window_size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * params.sigma ** 2))
    g /= g.sum()
    size = params.window_size
    return (
        Tensor(g.reshape(1, 1, size, 1)),
        Tensor(g.reshape(1, 1, 1, size))
    )


def _blur(x, taps):
    vertical, horizontal = taps
    return ops.conv2d(ops.conv2d(x, vertical), horizontal)


def _ssim_terms(a, b, params, taps):
    """Per-map means of the full SSIM map and of the contrast-structure map."""
    c1, c2 = params.c1, params.c2
    mu_a = _blur(a, taps)
    mu_b = _blur(b, taps)
    mu_aa = mu_a * mu_a
    mu_bb = mu_b * mu_b
    mu_ab = mu_a * mu_b
    var_a = _blur(a * a, taps) - mu_aa
    var_b = _blur(b * b, taps) - mu_bb
    cov = _blur(a * b, taps) - mu_ab

    cs = (cov * 2.0 + c2) / (var_a + var_b + c2)
    luminance = (mu_ab * 2.0 + c1) / (mu_aa + mu_bb + c1)
    axes = (1, 2, 3)
    return (luminance * cs).mean(axis=axes), cs.mean(axis=axes)


def ms_ssim(recon, target, params=None):
    """
    Differentiable MS-SSIM of two normalized image batches.

    Channels are scored independently and averaged together with the
    batch. Exponents come from `params`; SSIM exponents other than one
    are not supported here.
    """
    params = params or MsSsimParams()
    recon = as_tensor(recon)
    target = as_tensor(target)

    if recon.shape != target.shape:
        raise ShapeError(
            'Cannot compare {} with {}.'.format(
                format_shape(recon.shape), format_shape(target.shape)))

    if not params.ssim.unit_exponents:
        raise Error('The training MS-SSIM supports unit SSIM exponents only.')

    check_scales(recon.shape, params)
    height, width = recon.shape[-2:]
    a = (recon.reshape(-1, 1, height, width) + 1.0) * 127.5
    b = (target.reshape(-1, 1, height, width) + 1.0) * 127.5
    taps = _gaussian_taps(params.ssim)
    value = None

    for scale, weight in enumerate(params.weights):
        full, cs = _ssim_terms(a, b, params.ssim, taps)

        if scale == params.scales - 1:
            term = full.clamp_min(_EPS) ** weight
        else:
            term = cs.clamp_min(_EPS) ** weight
            a = ops.avg_pool2(a)
            b = ops.avg_pool2(b)

        value = term if value is None else value * term

    return value.mean()


def l1_loss(recon, target):
    recon = as_tensor(recon)
    target = as_tensor(target)

    if recon.shape != target.shape:
        raise ShapeError(
            'Cannot compare {} with {}.'.format(
                format_shape(recon.shape), format_shape(target.shape)))

    return (recon - target).abs().mean()


def bce_loss(logits, label):
    """Mean binary cross-entropy of every logit against a constant label."""
    logits = as_tensor(logits)

    if logits.size == 0:
        raise Error('Expected at least one logit, but got an empty batch.')

    return ops.bce_with_logits(logits, label).mean()


def discriminator_loss(d_real, d_fake):
    """Binary cross-entropy with real images labelled 1 and fakes 0, averaged over both."""
    d_real = as_tensor(d_real)
    d_fake = as_tensor(d_fake)

    if d_real.size == 0 or d_fake.size == 0:
        raise Error('Expected non-empty discriminator batches.')

    if d_real.shape != d_fake.shape:
        raise ShapeError(
            'Expected equal batches, but got {} real and {} fake logits.'.format(
                format_shape(d_real.shape), format_shape(d_fake.shape)))

    return (bce_loss(d_real, 1.0) + bce_loss(d_fake, 0.0)) * 0.5


def generator_loss(recon, target, d_fake_logits, alpha_mix, lambda_adv, ms_params=None):
    """
    ``λ·BCE(d_fake, 1) + α·(1 − MS-SSIM) + (1 − α)·L1``.

    Terms whose weight is zero are left out of the graph.
    """
    if not 0.0 <= alpha_mix <= 1.0:
        raise Error('Expected alpha_mix in [0, 1], but got {}.'.format(alpha_mix))

    recon = as_tensor(recon)
    target = as_tensor(target)

    if recon.shape != target.shape:
        raise ShapeError(
            'Cannot compare {} with {}.'.format(
                format_shape(recon.shape), format_shape(target.shape)))

    terms = []

    if lambda_adv:
        terms.append(bce_loss(d_fake_logits, 1.0) * lambda_adv)

    if alpha_mix:
        terms.append((1.0 - ms_ssim(recon, target, ms_params)) * alpha_mix)

    if alpha_mix != 1.0:
        terms.append(l1_loss(recon, target) * (1.0 - alpha_mix))

    loss = terms[0]

    for term in terms[1:]:
        loss = loss + term

    return loss
