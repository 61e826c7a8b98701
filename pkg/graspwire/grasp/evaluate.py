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

import json
import logging
from collections import namedtuple

from ..codec import decode
from ..codec import encode
from .detector import detect
from .rect import is_success

LOGGER = logging.getLogger(__name__)

BUCKETS = ('single', 'fewer_than_ten', 'ten_or_more')


def bucket_of(object_count):
    if object_count <= 1:
        return 'single'
    if object_count < 10:
        return 'fewer_than_ten'
    return 'ten_or_more'


SceneResult = namedtuple(
    'SceneResult',
    ['name', 'objects', 'candidates', 'successes', 'top1_success', 'objects_found']
)


def _ratio(numerator, denominator):
    return float(numerator) / denominator if denominator else None


class AccuracyReport(object):
    """
    Detection accuracy counted three ways: per image (the top candidate
    succeeds), per object (some candidate succeeds on that object) and
    per candidate (precision of everything emitted).
    """

    def __init__(self, results):
        self._results = list(results)

    @property
    def results(self):
        return self._results

    def _summary(self, results):
        images = [r for r in results if r.objects]
        objects = sum(r.objects for r in images)
        candidates = sum(r.candidates for r in results)

        return {
            'images': len(images),
            'image_accuracy': _ratio(sum(r.top1_success for r in images), len(images)),
            'objects': objects,
            'object_accuracy': _ratio(sum(r.objects_found for r in images), objects),
            'candidates': candidates,
            'candidate_precision': _ratio(sum(r.successes for r in results), candidates),
        }

    @property
    def image_accuracy(self):
        return self._summary(self._results)['image_accuracy']

    @property
    def object_accuracy(self):
        return self._summary(self._results)['object_accuracy']

    @property
    def candidate_precision(self):
        return self._summary(self._results)['candidate_precision']

    def to_dict(self, include_scenes=True):
        summary = self._summary(self._results)
        summary['buckets'] = {
            name: self._summary([r for r in self._results if r.objects and bucket_of(r.objects) == name])
            for name in BUCKETS
        }

        if include_scenes:
            summary['scenes'] = [r._asdict() for r in self._results]

        return summary

    def write_json(self, path):
        with open(path, 'w') as fout:
            json.dump(self.to_dict(), fout, indent=2, sort_keys=True)


def score_scene(scene, candidates):
    truths = scene.truths

    if not truths:
        return SceneResult(scene.name, 0, len(candidates), 0, False, 0)

    successes = sum(1 for cand in candidates if is_success(cand, truths))
    top1 = bool(candidates) and is_success(candidates[0], truths)
    found = sum(
        1 for rects in scene.objects
        if rects and any(is_success(cand, rects) for cand in candidates)
    )
    return SceneResult(scene.name, len(scene.objects), len(candidates), successes, top1, found)


def evaluate_detector(model, scenes, codec=None):
    """
    Score `model` on `scenes`.

    With `codec` every image is encoded and reconstructed first, which is
    what the cloud side sees.
    """
    results = []

    for scene in scenes:
        image = scene.image

        if codec is not None:
            image = decode(codec, encode(codec, image))

        results.append(score_scene(scene, detect(model, image)))

    report = AccuracyReport(results)
    LOGGER.info(
        'Evaluated %d scenes%s: image accuracy %s, object accuracy %s.',
        len(results),
        '' if codec is None else ' at {:.2f}%'.format(codec.compression_ratio),
        report.image_accuracy, report.object_accuracy)
    return report


class SweepPoint(namedtuple('SweepPoint', ['compression_ratio', 'model_id', 'report'])):
    __slots__ = ()

    def to_dict(self):
        d = self.report.to_dict(include_scenes=False)
        d['compression_ratio'] = self.compression_ratio
        d['model_id'] = None if self.model_id is None else '{:016x}'.format(self.model_id)
        return d


def ratio_sweep(model, scenes, codecs):
    """
    Accuracy on the raw images followed by accuracy after a round trip
    through each codec, highest compression ratio first. The raw point
    has ratio 100 and no model id.
    """
    scenes = list(scenes)
    points = [SweepPoint(100.0, None, evaluate_detector(model, scenes))]

    for codec in sorted(codecs, key=lambda c: -c.compression_ratio):
        points.append(SweepPoint(
            codec.compression_ratio, codec.model_id, evaluate_detector(model, scenes, codec)))

    return points
