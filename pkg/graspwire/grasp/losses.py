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
Detector objectives.

Both losses are sums over their rows, optionally divided by the number
of contributing rows. Regression terms only see rows whose label allows
them: positive anchors for the proposal loss, orientation bins other
than no-grasp for the configuration loss.
"""

import numpy as np

from ..errors import ShapeError
from ..utils import format_shape
from ..tensor import Tensor
from ..tensor import as_tensor
from ..tensor import ops
from .anchors import IGNORE
from .anchors import POSITIVE
from .rect import NO_GRASP


def _zero():
    return Tensor(np.zeros((), dtype=np.float32))


def gpn_loss(anchor_set, scores, deltas, lam=1.0, beta=1.0, normalize=False):
    """
    Proposal loss: cross-entropy of ``A×2`` `scores` (background, grasp)
    against the anchor labels plus `lam` times the smooth-L1 distance of
    ``A×4`` `deltas` to the targets of positive anchors.

    Ignored anchors contribute nothing. ``beta=0`` selects plain L1.
    """
    scores = as_tensor(scores)
    deltas = as_tensor(deltas)
    count = anchor_set.labels.shape[0]

    if scores.shape != (count, 2) or deltas.shape != (count, 4):
        raise ShapeError(
            'Expected {0}×2 scores and {0}×4 deltas, but got {1} and {2}.'.format(
                count, format_shape(scores.shape), format_shape(deltas.shape)))

    used = np.flatnonzero(anchor_set.labels != IGNORE)
    positives = np.flatnonzero(anchor_set.labels == POSITIVE)

    if used.size:
        classification = ops.cross_entropy(scores[used], anchor_set.labels[used]).sum()

        if normalize:
            classification = classification * (1.0 / used.size)
    else:
        classification = _zero()

    if positives.size:
        target = Tensor(anchor_set.targets[positives])
        regression = ops.smooth_l1(deltas[positives], target, beta).sum()

        if normalize:
            regression = regression * (1.0 / positives.size)

        return classification + regression * lam

    return classification


def gcr_loss(class_logits, bins, box_deltas, box_targets, lam2=1.0, beta=1.0, normalize=False):
    """
    Configuration loss: cross-entropy of ``K×21`` `class_logits` against
    the ground-truth `bins` plus `lam2` times the smooth-L1 distance
    between the refinement predicted for each row's own bin and
    `box_targets`, skipped for no-grasp rows.

    `box_deltas` is ``K×21×4`` (per-bin refinements) or ``K×4``.
    """
    class_logits = as_tensor(class_logits)
    box_deltas = as_tensor(box_deltas)
    bins = np.asarray(bins, dtype=np.int64).reshape(-1)
    box_targets = np.asarray(box_targets, dtype=np.float32).reshape(-1, 4)
    count = bins.shape[0]

    if class_logits.ndim != 2 or class_logits.shape[0] != count:
        raise ShapeError(
            'Expected {} rows of bin logits, but got {}.'.format(count, format_shape(class_logits.shape)))

    if box_targets.shape[0] != count or box_deltas.shape[0] != count:
        raise ShapeError(
            'Expected {} refinements and targets, but got {} and {}.'.format(
                count, format_shape(box_deltas.shape), format_shape(box_targets.shape)))

    if box_deltas.ndim == 3:
        if box_deltas.shape[1:] != (class_logits.shape[1], 4):
            raise ShapeError(
                'Expected per-bin refinements of shape {}×{}×4, but got {}.'.format(
                    count, class_logits.shape[1], format_shape(box_deltas.shape)))
    elif box_deltas.shape[1:] != (4,):
        raise ShapeError(
            'Expected {}×4 refinements, but got {}.'.format(count, format_shape(box_deltas.shape)))

    if count == 0:
        return _zero()

    classification = ops.cross_entropy(class_logits, bins).sum()

    if normalize:
        classification = classification * (1.0 / count)

    graspable = np.flatnonzero(bins != NO_GRASP)

    if not graspable.size:
        return classification

    if box_deltas.ndim == 3:
        predicted = box_deltas[graspable, bins[graspable]]
    else:
        predicted = box_deltas[graspable]

    regression = ops.smooth_l1(predicted, Tensor(box_targets[graspable]), beta).sum()

    if normalize:
        regression = regression * (1.0 / graspable.size)

    return classification + regression * lam2


def total_loss(l_gpn, l_gcr):
    return l_gpn + l_gcr
