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
How much an intercepted latent reveals without the paired decoder.

The measure is the average SSIM gap between reconstructions by the
decoder trained with the encoder and by a foreign decoder.
"""

import json
import logging
from collections import namedtuple

import numpy as np

from ..codec import decode
from ..codec import encode
from ..errors import Error
from ..images import denormalize
from ..metrics import ssim

LOGGER = logging.getLogger(__name__)

MIN_IMAGES = 10
GAP_THRESHOLD = 0.3


class MismatchReport(namedtuple(
    'MismatchReport',
    ['matched', 'foreign', 'count', 'threshold']
)):
    """
    :param matched: average SSIM under the paired decoder
    :param foreign: average SSIM under the foreign decoder
    :param count: number of images
    :param threshold: smallest gap that counts as a pass
    """

    __slots__ = ()

    @property
    def gap(self):
        return self.matched - self.foreign

    @property
    def passed(self):
        return self.gap >= self.threshold

    def to_dict(self):
        d = self._asdict()
        d['gap'] = self.gap
        d['passed'] = self.passed
        return d

    def write_json(self, path):
        with open(path, 'w') as fout:
            json.dump(self.to_dict(), fout, indent=2, sort_keys=True)


def _average_ssim(images, encoder, decoder):
    scores = []

    for image in images:
        recon = decode(decoder, encode(encoder, image))
        scores.append(ssim(denormalize(image), denormalize(recon)))

    return float(np.mean(scores))


def mismatch_gap(images, encoder, matched_decoder, foreign_decoder, threshold=GAP_THRESHOLD):
    """
    Reconstruct every normalized image in `images` through `encoder`
    followed by each decoder and compare the average SSIMs.

    All three arguments after `images` are
    :class:`~graspwire.codec.CodecModel` instances; only the encoder
    half of `encoder` and the decoder halves of the others are used.
    """
    images = list(images)

    if len(images) < MIN_IMAGES:
        raise Error(
            'Expected at least {} images, but got {}.'.format(MIN_IMAGES, len(images)))

    report = MismatchReport(
        _average_ssim(images, encoder, matched_decoder),
        _average_ssim(images, encoder, foreign_decoder),
        len(images),
        float(threshold))

    LOGGER.info(
        'Matched SSIM %.4f, foreign SSIM %.4f, gap %.4f.',
        report.matched, report.foreign, report.gap)
    return report
