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
Axis-aligned anchors, box matching and non-maximum suppression.

Boxes are ``(x1, y1, x2, y2)`` rows in image pixels.
"""

import logging
from collections import namedtuple

import numpy as np

LOGGER = logging.getLogger(__name__)

POSITIVE_IOU = 0.5
NEGATIVE_IOU = 0.3

# log-extent deltas beyond this are clipped when decoding
MAX_LOG_DELTA = float(np.log(1000.0 / 16.0))

POSITIVE = 1
NEGATIVE = 0
IGNORE = -1


def generate_anchors(feature_shape, image_shape, scales=(24.0, 40.0, 64.0), ratios=(0.5, 1.0, 2.0)):
    """
    Anchors centered on every feature cell, cell-major then scale-major.

    A ratio is width over height; every anchor of a scale has the same area.
    """
    rows, cols = feature_shape
    height, width = image_shape
    stride_y = height / float(rows)
    stride_x = width / float(cols)

    shapes = []

    for scale in scales:
        for ratio in ratios:
            root = np.sqrt(ratio)
            shapes.append((scale * root, scale / root))

    shapes = np.array(shapes, dtype=np.float64)
    ys = (np.arange(rows) + 0.5) * stride_y
    xs = (np.arange(cols) + 0.5) * stride_x
    cy, cx = np.meshgrid(ys, xs, indexing='ij')
    centers = np.stack([cx.reshape(-1), cy.reshape(-1)], axis=1)

    cx = centers[:, None, 0]
    cy = centers[:, None, 1]
    aw = shapes[None, :, 0]
    ah = shapes[None, :, 1]
    boxes = np.stack([cx - aw / 2, cy - ah / 2, cx + aw / 2, cy + ah / 2], axis=-1)
    return boxes.reshape(-1, 4)


def box_area(boxes):
    boxes = np.asarray(boxes, dtype=np.float64)
    return np.maximum(boxes[..., 2] - boxes[..., 0], 0.0) * np.maximum(boxes[..., 3] - boxes[..., 1], 0.0)


def box_iou(a, b):
    """Pairwise IoU matrix of box arrays `a` (N×4) and `b` (M×4)."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    x1 = np.maximum(a[:, None, 0], b[None, :, 0])
    y1 = np.maximum(a[:, None, 1], b[None, :, 1])
    x2 = np.minimum(a[:, None, 2], b[None, :, 2])
    y2 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.maximum(x2 - x1, 0.0) * np.maximum(y2 - y1, 0.0)
    union = box_area(a)[:, None] + box_area(b)[None, :] - inter

    with np.errstate(divide='ignore', invalid='ignore'):
        iou = np.where(union > 0, inter / union, 0.0)

    return iou


def _centers(boxes):
    w = boxes[:, 2] - boxes[:, 0]
    h = boxes[:, 3] - boxes[:, 1]
    return boxes[:, 0] + 0.5 * w, boxes[:, 1] + 0.5 * h, w, h


def encode_boxes(anchors, boxes):
    """Offsets ``(dx, dy, log dw, log dh)`` taking `anchors` onto `boxes`."""
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 4)
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    ax, ay, aw, ah = _centers(anchors)
    bx, by, bw, bh = _centers(boxes)
    return np.stack([(bx - ax) / aw, (by - ay) / ah, np.log(bw / aw), np.log(bh / ah)], axis=1)


def decode_boxes(anchors, deltas):
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 4)
    deltas = np.asarray(deltas, dtype=np.float64).reshape(-1, 4)
    ax, ay, aw, ah = _centers(anchors)
    cx = ax + deltas[:, 0] * aw
    cy = ay + deltas[:, 1] * ah
    w = aw * np.exp(np.minimum(deltas[:, 2], MAX_LOG_DELTA))
    h = ah * np.exp(np.minimum(deltas[:, 3], MAX_LOG_DELTA))
    return np.stack([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2], axis=1)


def clip_boxes(boxes, image_shape):
    height, width = image_shape
    boxes = np.array(boxes, dtype=np.float64)
    boxes[:, 0::2] = np.clip(boxes[:, 0::2], 0.0, width)
    boxes[:, 1::2] = np.clip(boxes[:, 1::2], 0.0, height)
    return boxes


def score_order(scores):
    """Indices by descending score, ties broken by lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.lexsort((np.arange(scores.size), -scores))


def nms(boxes, scores, threshold=0.5):
    """Greedy non-maximum suppression returning kept indices in score order."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    areas = box_area(boxes)
    order = score_order(scores)
    keep = []

    while order.size > 0:
        i = order[0]
        keep.append(int(i))
        rest = order[1:]
        xx1 = np.maximum(boxes[i, 0], boxes[rest, 0])
        yy1 = np.maximum(boxes[i, 1], boxes[rest, 1])
        xx2 = np.minimum(boxes[i, 2], boxes[rest, 2])
        yy2 = np.minimum(boxes[i, 3], boxes[rest, 3])
        inter = np.maximum(0.0, xx2 - xx1) * np.maximum(0.0, yy2 - yy1)
        union = areas[i] + areas[rest] - inter
        overlap = np.where(union > 0, inter / np.maximum(union, 1e-12), 0.0)
        order = rest[overlap <= threshold]

    return keep


class AnchorSet(namedtuple('AnchorSet', ['anchors', 'labels', 'targets', 'matches'])):
    """
    Anchors with their training assignment.

    :param anchors: ``A×4`` boxes
    :param labels: ``A`` values, 1 positive, 0 negative, -1 ignored
    :param targets: ``A×4`` regression targets, zero except on positives
    :param matches: index of the matched truth per anchor, -1 when none
    """

    __slots__ = ()

    @property
    def positives(self):
        return np.flatnonzero(self.labels == POSITIVE)

    @property
    def negatives(self):
        return np.flatnonzero(self.labels == NEGATIVE)


def assign_anchor_targets(anchors, truths, positive_iou=POSITIVE_IOU, negative_iou=NEGATIVE_IOU):
    """
    Label `anchors` against the axis-aligned hulls of `truths`.

    An anchor is positive when it overlaps a hull by at least
    `positive_iou` or is the best anchor for some hull, negative below
    `negative_iou`, and ignored otherwise.
    """
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 4)
    count = anchors.shape[0]
    labels = np.full(count, IGNORE, dtype=np.int64)
    targets = np.zeros((count, 4), dtype=np.float64)
    matches = np.full(count, -1, dtype=np.int64)

    if not truths:
        labels[:] = NEGATIVE
        return AnchorSet(anchors, labels, targets, matches)

    hulls = np.array([truth.hull() for truth in truths], dtype=np.float64)
    iou = box_iou(anchors, hulls)
    best_truth = iou.argmax(axis=1)
    best_iou = iou[np.arange(count), best_truth]

    labels[best_iou < negative_iou] = NEGATIVE
    labels[best_iou >= positive_iou] = POSITIVE

    for t in range(hulls.shape[0]):
        column = iou[:, t]

        if column.max() <= 0:
            continue

        # the first anchor with the highest overlap
        anchor = int(np.argmax(column))
        labels[anchor] = POSITIVE
        best_truth[anchor] = t

    positive = labels == POSITIVE
    matches[positive] = best_truth[positive]
    targets[positive] = encode_boxes(anchors[positive], hulls[best_truth[positive]])
    return AnchorSet(anchors, labels, targets, matches)
