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
Image-quality metrics: PSNR, SSIM and MS-SSIM.

All functions take pixel-scale arrays (``[0, 255]`` by default) shaped
``H×W`` or ``C×H×W``. Colour images are scored per channel and the
channel scores averaged.
"""

import csv
import json
import logging
import os
from collections import namedtuple

import numpy as np
from scipy import ndimage
from scipy import signal

from .errors import Error
from .errors import ScaleError
from .errors import ShapeError
from .utils import format_shape
from . import images

LOGGER = logging.getLogger(__name__)

# canonical five-scale exponents, finest scale first
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


class PerfectMatch(object):
    """PSNR outcome for identical images, where the ratio is unbounded."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)

        return cls._instance

    def __repr__(self):
        return 'PERFECT_MATCH'

    def __reduce__(self):
        return PerfectMatch, ()


PERFECT_MATCH = PerfectMatch()


class SsimParams(namedtuple(
    'SsimParams',
    ['window_size', 'sigma', 'dynamic_range', 'k1', 'k2', 'alpha', 'beta', 'gamma']
)):
    __slots__ = ()

    def __new__(cls, window_size=11, sigma=1.5, dynamic_range=255.0, k1=0.01, k2=0.03,
                alpha=1.0, beta=1.0, gamma=1.0):
        self = super(SsimParams, cls).__new__(
            cls, int(window_size), float(sigma), float(dynamic_range), float(k1), float(k2),
            float(alpha), float(beta), float(gamma))

        if self.window_size < 1 or self.sigma <= 0 or self.dynamic_range <= 0:
            raise Error(
                'Expected a positive window, sigma and range, but got {}, {} and {}.'.format(
                    self.window_size, self.sigma, self.dynamic_range))

        if self.k1 <= 0 or self.k2 <= 0:
            raise Error('Expected positive stabilizers, but got {} and {}.'.format(self.k1, self.k2))

        return self

    @property
    def c1(self):
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self):
        return (self.k2 * self.dynamic_range) ** 2

    @property
    def c3(self):
        return self.c2 / 2.0

    @property
    def unit_exponents(self):
        return self.alpha == 1.0 and self.beta == 1.0 and self.gamma == 1.0

    @property
    def window(self):
        return gaussian_window(self.window_size, self.sigma)


class MsSsimParams(namedtuple('MsSsimParams', ['scales', 'weights', 'ssim'])):
    """
    :param scales: number of scales, the input being the finest
    :param weights: per-scale exponents, finest first; renormalized to sum 1.
                    Defaults to the first `scales` canonical weights.
    :param ssim: :class:`SsimParams` used at every scale
    """

    __slots__ = ()

    def __new__(cls, scales=3, weights=None, ssim=None):
        scales = int(scales)

        if scales < 1:
            raise Error('Expected at least one scale, but got {}.'.format(scales))

        if weights is None:
            if scales > len(MS_SSIM_WEIGHTS):
                raise Error(
                    'Expected explicit weights beyond {} scales.'.format(len(MS_SSIM_WEIGHTS)))

            weights = MS_SSIM_WEIGHTS[:scales]

        weights = np.asarray(weights, dtype=np.float64)

        if weights.shape != (scales,) or np.any(weights < 0) or weights.sum() <= 0:
            raise Error(
                'Expected {} non-negative weights, but got {}.'.format(scales, list(weights)))

        weights = tuple(float(w) for w in weights / weights.sum())
        return super(MsSsimParams, cls).__new__(cls, scales, weights, ssim or SsimParams())


def gaussian_window(size, sigma):
    """Normalized ``size×size`` Gaussian window."""
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def _channels(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    if a.shape != b.shape:
        raise ShapeError(
            'Cannot compare images of shape {} and {}.'.format(
                format_shape(a.shape), format_shape(b.shape)))

    if a.ndim == 2:
        return a[None], b[None]

    if a.ndim == 3:
        return a, b

    raise ShapeError(
        'Expected an H×W or C×H×W image, but got shape {}.'.format(format_shape(a.shape)))


def psnr(a, b, max_value=255.0):
    """Peak signal-to-noise ratio in decibels, or :data:`PERFECT_MATCH`."""
    a, b = _channels(a, b)
    mse = float(np.mean((a - b) ** 2))

    if mse == 0.0:
        return PERFECT_MATCH

    return 10.0 * np.log10(max_value ** 2 / mse)


def _power(base, exponent):
    if exponent == 1.0:
        return base

    if float(exponent).is_integer():
        return base ** exponent

    return np.maximum(base, 0.0) ** exponent


def _filter(image, window):
    return signal.convolve2d(image, window, mode='valid')


def ssim_maps(a, b, params):
    """
    Per-window ``(ssim, cs)`` maps of two single-channel images, where
    ``cs`` is the contrast-structure product without luminance.
    """
    height, width = a.shape
    size = params.window_size

    if height < size or width < size:
        raise ShapeError(
            'Expected images of at least {0}×{0}, but got {1}×{2}.'.format(size, height, width))

    window = params.window
    mu_a = _filter(a, window)
    mu_b = _filter(b, window)
    var_a = _filter(a * a, window) - mu_a * mu_a
    var_b = _filter(b * b, window) - mu_b * mu_b
    cov = _filter(a * b, window) - mu_a * mu_b
    c1, c2, c3 = params.c1, params.c2, params.c3

    luminance = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)

    if params.unit_exponents and c3 == c2 / 2.0:
        cs = (2.0 * cov + c2) / (var_a + var_b + c2)
        return luminance * cs, cs

    sd_a = np.sqrt(np.maximum(var_a, 0.0))
    sd_b = np.sqrt(np.maximum(var_b, 0.0))
    contrast = (2.0 * sd_a * sd_b + c2) / (var_a + var_b + c2)
    structure = (cov + c3) / (sd_a * sd_b + c3)
    cs = _power(contrast, params.beta) * _power(structure, params.gamma)
    return _power(luminance, params.alpha) * cs, cs


def ssim(a, b, params=None):
    """Mean structural similarity over all windows and channels."""
    params = params or SsimParams()
    a, b = _channels(a, b)
    scores = [np.mean(ssim_maps(ca, cb, params)[0]) for ca, cb in zip(a, b)]
    return float(np.mean(scores))


def downsample(image):
    """2×2 average pooling; an odd trailing row or column is dropped."""
    height, width = image.shape[-2:]
    h2, w2 = height // 2, width // 2
    cropped = image[..., :2 * h2, :2 * w2]
    return cropped.reshape(image.shape[:-2] + (h2, 2, w2, 2)).mean(axis=(-3, -1))


def check_scales(shape, params):
    """Raise :class:`ScaleError` unless `shape` supports every scale."""
    height, width = shape[-2:]
    size = params.ssim.window_size

    for scale in range(params.scales):
        if height < size or width < size:
            raise ScaleError(
                '{}×{} supports only {} of {} scales with an {}-pixel window.'.format(
                    shape[-2], shape[-1], scale, params.scales, size))

        height //= 2
        width //= 2


def ms_ssim(a, b, params=None):
    """
    Multi-scale structural similarity.

    Scales finer than the last contribute the mean contrast-structure
    term; the last scale contributes the mean full SSIM term, so luminance
    enters only at the coarsest scale.
    """
    params = params or MsSsimParams()
    a, b = _channels(a, b)
    check_scales(a.shape, params)
    scores = []

    for ca, cb in zip(a, b):
        value = 1.0

        for scale, weight in enumerate(params.weights):
            full, cs = ssim_maps(ca, cb, params.ssim)

            if scale == params.scales - 1:
                value *= _power(np.mean(full), weight)
            else:
                value *= _power(np.mean(cs), weight)
                ca = downsample(ca)
                cb = downsample(cb)

        scores.append(value)

    return float(np.mean(scores))


QualityRow = namedtuple('QualityRow', ['name', 'psnr', 'ssim', 'ms_ssim', 'complexity'])

# share of pairs, most complex first, reported as high complexity
HIGH_COMPLEXITY_SHARE = 0.4

COMPLEXITY_CLASSES = ('high', 'low')


def complexity(pixels):
    """Mean Sobel gradient magnitude of the channel-averaged image."""
    gray = np.asarray(pixels, dtype=np.float64)

    if gray.ndim == 3:
        gray = gray.mean(axis=0)

    if gray.ndim != 2:
        raise ShapeError(
            'Expected an H×W or C×H×W image, but got shape {}.'.format(format_shape(gray.shape)))

    return float(np.mean(np.hypot(ndimage.sobel(gray, axis=0), ndimage.sobel(gray, axis=1))))


def _psnr_value(value):
    return None if value is PERFECT_MATCH else float(value)


def _averages(rows):
    if not rows:
        return {'count': 0, 'psnr': None, 'ssim': None, 'ms_ssim': None, 'perfect_matches': 0}

    finite = [_psnr_value(r.psnr) for r in rows if r.psnr is not PERFECT_MATCH]

    return {
        'count': len(rows),
        'psnr': float(np.mean(finite)) if finite else None,
        'ssim': float(np.mean([r.ssim for r in rows])),
        'ms_ssim': float(np.mean([r.ms_ssim for r in rows])),
        'perfect_matches': len(rows) - len(finite),
    }


class QualityReport(object):
    """
    Per-pair scores plus dataset averages.

    Pairs are also split by the complexity of the original: the most
    complex two fifths form the high class and the rest the low class,
    ties broken by name.
    """

    def __init__(self, rows):
        self._rows = list(rows)

    @property
    def rows(self):
        return self._rows

    @property
    def averages(self):
        return _averages(self._rows)

    def complexity_classes(self):
        ranked = sorted(self._rows, key=lambda r: (-r.complexity, r.name))
        high = int(round(len(ranked) * HIGH_COMPLEXITY_SHARE))
        return {r.name: 'high' if i < high else 'low' for i, r in enumerate(ranked)}

    @property
    def by_complexity(self):
        classes = self.complexity_classes()
        return {
            name: _averages([r for r in self._rows if classes[r.name] == name])
            for name in COMPLEXITY_CLASSES
        }

    def to_dict(self):
        classes = self.complexity_classes()
        return {
            'pairs': [
                {
                    'name': r.name,
                    'psnr': _psnr_value(r.psnr),
                    'perfect_match': r.psnr is PERFECT_MATCH,
                    'ssim': r.ssim,
                    'ms_ssim': r.ms_ssim,
                    'complexity': r.complexity,
                    'complexity_class': classes[r.name],
                }
                for r in self._rows
            ],
            'averages': self.averages,
            'by_complexity': self.by_complexity,
        }

    def write_json(self, path):
        with open(path, 'w') as fout:
            json.dump(self.to_dict(), fout, indent=2, sort_keys=True)

    def write_csv(self, path):
        classes = self.complexity_classes()

        with open(path, 'w', newline='') as fout:
            writer = csv.writer(fout)
            writer.writerow(['name', 'psnr', 'ssim', 'ms_ssim', 'complexity', 'complexity_class'])

            for r in self._rows:
                psnr_text = 'inf' if r.psnr is PERFECT_MATCH else repr(float(r.psnr))
                writer.writerow([
                    r.name, psnr_text, repr(r.ssim), repr(r.ms_ssim), repr(r.complexity),
                    classes[r.name]
                ])


def score_pair(name, original, reconstruction, ms_params=None):
    return QualityRow(
        name,
        psnr(original, reconstruction),
        ssim(original, reconstruction, (ms_params or MsSsimParams()).ssim),
        ms_ssim(original, reconstruction, ms_params),
        complexity(original)
    )


def evaluate_pairs(directory, ms_params=None):
    """
    Score every ``<stem>_orig.png`` against its ``<stem>_recon.png``.

    Pairs are visited in sorted stem order; an original without a
    reconstruction is skipped with a warning.
    """
    rows = []
    suffix = '_orig.png'

    for entry in sorted(os.listdir(directory)):
        if not entry.endswith(suffix):
            continue

        stem = entry[:-len(suffix)]
        recon_path = os.path.join(directory, stem + '_recon.png')

        if not os.path.exists(recon_path):
            LOGGER.warning('No reconstruction for %s, skipping.', entry)
            continue

        original = images.load_pixels(os.path.join(directory, entry))
        reconstruction = images.load_pixels(recon_path)
        rows.append(score_pair(stem, original, reconstruction, ms_params))

    LOGGER.info('Scored %d image pairs in %s.', len(rows), directory)
    return QualityReport(rows)
