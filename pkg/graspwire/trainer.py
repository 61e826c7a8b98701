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
Adversarial codec training.

The decoder plays the generator. Each batch runs one discriminator
update followed by one joint encoder/decoder update under
:func:`graspwire.losses.generator_loss`.
"""

import json
import logging
import math
from collections import namedtuple

import numpy as np

from .errors import DatasetError
from .errors import Error
from .errors import ShapeError
from .errors import TrainingError
from .codec import CodecModel
from .utils import format_shape
from .high_precision_timer import TimerMS
from .tensor import Adam
from .tensor import Tensor
from .tensor import no_grad
from .tensor import ops
from .tensor.layers import Conv2d
from .tensor.layers import Linear
from .tensor.layers import Module
from .tensor.layers import he_gain
from . import images
from . import losses
from . import metrics

LOGGER = logging.getLogger(__name__)

SLOPE = 0.2


class Discriminator(Module):
    """
    Stride-2 convolutions with LeakyReLU and dropout, global average
    pooling and a linear layer producing one logit per image.
    """

    def __init__(self, channels=(3, 8, 16, 32, 32), dropout=0.3, seed=None):
        Module.__init__(self)
        rng = np.random.default_rng(seed)
        self._dropout = dropout
        self._rng = np.random.default_rng(rng.integers(0, 2 ** 63))
        gain = he_gain(SLOPE)
        self.convs = [
            self.register_module(
                'conv{}'.format(index), Conv2d(c_in, c_out, 4, 2, 1, rng=rng, gain=gain))
            for index, (c_in, c_out) in enumerate(zip(channels[:-1], channels[1:]))
        ]
        self.head = self.register_module('head', Linear(channels[-1], 1, rng=rng))

    @property
    def dropout(self):
        return self._dropout

    def forward(self, x):
        if x.ndim == 3:
            x = x.reshape((1,) + x.shape)

        mode = 'train' if self.training else 'eval'

        for conv in self.convs:
            x = ops.leaky_relu(conv(x), SLOPE)
            x = ops.dropout(x, self._dropout, mode, self._rng)

        pooled = x.mean(axis=(2, 3))
        return self.head(pooled).reshape(-1)


class TrainConfig(namedtuple(
    'TrainConfig',
    [
        'epochs', 'learning_rate', 'batch_size', 'log_every', 'lambda_adv',
        'alpha_mix', 'seed', 'dropout', 'max_steps', 'validation_size'
    ]
)):
    __slots__ = ()

    def __new__(cls, epochs=10, learning_rate=2e-4, batch_size=30, log_every=50,
                lambda_adv=0.01, alpha_mix=0.84, seed=0, dropout=0.3,
                max_steps=None, validation_size=8):
        self = super(TrainConfig, cls).__new__(
            cls, int(epochs), float(learning_rate), int(batch_size), int(log_every),
            float(lambda_adv), float(alpha_mix), int(seed), float(dropout),
            None if max_steps is None else int(max_steps), int(validation_size))
        self.validate()
        return self

    def validate(self):
        for name in ('epochs', 'learning_rate', 'batch_size', 'log_every', 'validation_size'):
            if getattr(self, name) <= 0:
                raise Error('Expected a positive {}, but got {}.'.format(name, getattr(self, name)))

        if self.lambda_adv < 0:
            raise Error('Expected lambda_adv >= 0, but got {}.'.format(self.lambda_adv))

        if not 0.0 <= self.alpha_mix <= 1.0:
            raise Error('Expected alpha_mix in [0, 1], but got {}.'.format(self.alpha_mix))

        if not 0.0 <= self.dropout < 1.0:
            raise Error('Expected dropout in [0, 1), but got {}.'.format(self.dropout))

        if self.max_steps is not None and self.max_steps < 0:
            raise Error('Expected max_steps >= 0, but got {}.'.format(self.max_steps))


LogEntry = namedtuple(
    'LogEntry',
    ['index', 'step', 'epoch', 'generator_loss', 'discriminator_loss', 'val_ssim', 'val_psnr']
)


class TrainReport(object):
    """Log points of a training run; entry 0 is measured before any update."""

    def __init__(self, entries=None):
        self._entries = list(entries or [])

    @property
    def entries(self):
        return self._entries

    def append(self, entry):
        self._entries.append(entry)

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        return isinstance(other, TrainReport) and self._entries == other._entries

    def __ne__(self, other):
        return not self == other

    def to_dicts(self):
        return [entry._asdict() for entry in self._entries]

    def to_jsonl(self):
        return ''.join(json.dumps(d, sort_keys=True) + '\n' for d in self.to_dicts())

    def write_jsonl(self, path):
        with open(path, 'w') as fout:
            fout.write(self.to_jsonl())


def reconstruct(model, batch):
    """Encode and decode a normalized ``N×3×H×W`` batch without recording."""
    with no_grad():
        return model.decoder(model.encoder(Tensor(batch))).data


def validation_scores(model, batch):
    """Mean SSIM and PSNR of `batch` against its reconstructions, on the pixel scale."""
    recon = reconstruct(model, batch)
    ssim_values = []
    psnr_values = []

    for original, restored in zip(batch, recon):
        a = images.denormalize(original)
        b = images.denormalize(restored)
        ssim_values.append(metrics.ssim(a, b))
        value = metrics.psnr(a, b)

        if value is not metrics.PERFECT_MATCH:
            psnr_values.append(value)

    return (
        float(np.mean(ssim_values)),
        float(np.mean(psnr_values)) if psnr_values else None
    )


def _as_dataset(dataset, input_shape):
    data = np.asarray(dataset, dtype=np.float32)

    if data.ndim != 4 or data.shape[0] == 0:
        raise DatasetError(
            'Expected a non-empty N×C×H×W dataset, but got shape {}.'.format(
                format_shape(data.shape)))

    if data.shape[1:] != tuple(input_shape):
        raise ShapeError(
            'Expected images of shape {}, but got {}.'.format(
                format_shape(input_shape), format_shape(data.shape[1:])))

    return data


def _check_finite(step, name, value):
    """Return `value`; a non-finite loss aborts before it reaches any parameter."""
    if not math.isfinite(value):
        raise TrainingError(
            'Non-finite {} loss ({}) at step {}.'.format(name, value, step))

    return value


def _losses(model, discriminator, batch, config):
    x = Tensor(batch)
    recon = model.decoder(model.encoder(x))
    d_real = discriminator(x)
    d_fake = discriminator(recon)
    loss_d = losses.discriminator_loss(d_real, d_fake)
    loss_g = losses.generator_loss(recon, x, d_fake, config.alpha_mix, config.lambda_adv)
    return loss_g.item(), loss_d.item()


def train(dataset, config=None, codec_config=None, model=None, discriminator=None):
    """
    Train a codec adversarially on a normalized image array.

    :param dataset: ``N×3×H×W`` float array in ``[-1, 1]``
    :param config: :class:`TrainConfig`
    :param codec_config: :class:`~graspwire.codec.CodecConfig` for a fresh model
    :param model: continue training this :class:`~graspwire.codec.CodecModel`
    :param discriminator: continue training this :class:`Discriminator`
    :return: ``(model, discriminator, report)``
    """
    config = config or TrainConfig()
    model = model or CodecModel(codec_config, seed=config.seed)
    discriminator = discriminator or Discriminator(dropout=config.dropout, seed=config.seed + 1)
    data = _as_dataset(dataset, model.config.input_shape)
    rng = np.random.default_rng(config.seed + 2)
    validation = data[:config.validation_size]

    g_opt = Adam(model.parameters(), lr=config.learning_rate)
    d_opt = Adam(discriminator.parameters(), lr=config.learning_rate)
    report = TrainReport()

    def log_point(step, epoch, loss_g, loss_d):
        val_ssim, val_psnr = validation_scores(model, validation)
        entry = LogEntry(len(report), step, epoch, loss_g, loss_d, val_ssim, val_psnr)
        report.append(entry)
        LOGGER.info(
            'step %d epoch %d: G %.5f D %.5f SSIM %.4f PSNR %s',
            step, epoch, loss_g, loss_d, val_ssim,
            'n/a' if val_psnr is None else '{:.2f}'.format(val_psnr))

    discriminator.eval()

    with no_grad():
        baseline_g, baseline_d = _losses(model, discriminator, validation, config)

    discriminator.train()
    log_point(0, 0, baseline_g, baseline_d)

    step = 0
    timer = TimerMS()

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(data.shape[0])

        for start in range(0, data.shape[0], config.batch_size):
            if config.max_steps is not None and step >= config.max_steps:
                break

            batch = data[order[start:start + config.batch_size]]
            x = Tensor(batch)

            with no_grad():
                fake = model.decoder(model.encoder(x))

            d_opt.zero_grad()
            loss_d = losses.discriminator_loss(discriminator(x), discriminator(fake))
            value_d = _check_finite(step + 1, 'discriminator', loss_d.item())
            loss_d.backward()
            d_opt.step()

            recon = model.decoder(model.encoder(x))
            d_fake = discriminator(recon) if config.lambda_adv else None
            loss_g = losses.generator_loss(recon, x, d_fake, config.alpha_mix, config.lambda_adv)
            value_g = _check_finite(step + 1, 'generator', loss_g.item())
            g_opt.zero_grad()
            loss_g.backward()
            g_opt.step()

            step += 1

            if step % config.log_every == 0:
                log_point(step, epoch, value_g, value_d)

        if config.max_steps is not None and step >= config.max_steps:
            break

    LOGGER.info('Finished %d steps in %.0f ms.', step, timer.elapsed)
    discriminator.eval()
    return model, discriminator, report
