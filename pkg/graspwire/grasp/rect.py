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
Oriented grasp rectangles, orientation bins and the success criterion.

Coordinates are image pixels with x to the right and y down. A
rectangle's `w` runs along its orientation (the gripper opening) and
`h` across it (the plates).
"""

import math

import numpy as np

from ..errors import Error

NO_GRASP = 0
BIN_COUNT = 20
BIN_WIDTH = 180.0 / BIN_COUNT

SUCCESS_ANGLE = 30.0
SUCCESS_IOU = 0.25


def canonical_angle(theta):
    """Fold `theta` (degrees) into ``[-90, 90)`` with period 180."""
    theta = float(theta)

    if not math.isfinite(theta):
        raise Error('Expected a finite angle, but got {}.'.format(theta))

    folded = (theta + 90.0) % 180.0 - 90.0

    if folded >= 90.0:
        folded -= 180.0

    return folded


def angle_difference(a, b):
    """Circular difference of two orientations with period 180, in ``[0, 90]``."""
    d = abs(canonical_angle(a) - canonical_angle(b)) % 180.0
    return min(d, 180.0 - d)


def angle_to_bin(theta):
    """Orientation bin 1..20; bin k covers ``[-90 + (k-1)·9, -90 + k·9)``."""
    index = int(math.floor((canonical_angle(theta) + 90.0) / BIN_WIDTH)) + 1
    return min(max(index, 1), BIN_COUNT)


def bin_to_angle(index):
    """Center angle of orientation bin `index`; the no-grasp bin has none."""
    if index == NO_GRASP:
        raise Error('The no-grasp bin has no orientation.')

    if not 1 <= index <= BIN_COUNT:
        raise Error(
            'Expected an orientation bin in 1..{}, but got {}.'.format(BIN_COUNT, index))

    return -90.0 + (index - 0.5) * BIN_WIDTH


class GraspRect(object):
    """
    Oriented grasp rectangle.

    :param x: center column
    :param y: center row
    :param w: gripper opening extent
    :param h: plate extent
    :param theta: orientation of `w` in degrees, stored in ``[-90, 90)``
    """

    def __init__(self, x, y, w, h, theta):
        values = [float(v) for v in (x, y, w, h, theta)]

        if not all(math.isfinite(v) for v in values):
            raise Error('Expected finite rectangle values, but got {}.'.format(values))

        if values[2] <= 0 or values[3] <= 0:
            raise Error(
                'Expected positive extents, but got w={} and h={}.'.format(values[2], values[3]))

        self._x, self._y, self._w, self._h = values[:4]
        self._theta = canonical_angle(values[4])

    @classmethod
    def from_vertices(cls, points):
        """
        Build a rectangle from four vertices in order.

        The first edge gives `w` and the orientation, the second edge `h`.
        """
        points = np.asarray(points, dtype=np.float64).reshape(4, 2)
        x, y = points.mean(axis=0)
        first = points[1] - points[0]
        second = points[2] - points[1]
        theta = math.degrees(math.atan2(first[1], first[0]))
        return cls(x, y, float(np.hypot(*first)), float(np.hypot(*second)), theta)

    @property
    def x(self):
        return self._x

    @property
    def y(self):
        return self._y

    @property
    def w(self):
        return self._w

    @property
    def h(self):
        return self._h

    @property
    def theta(self):
        return self._theta

    @property
    def area(self):
        return self._w * self._h

    @property
    def bin(self):
        return angle_to_bin(self._theta)

    def corners(self):
        """The four vertices as a ``4×2`` array, first edge along `w`."""
        rad = math.radians(self._theta)
        u = np.array([math.cos(rad), math.sin(rad)]) * (self._w / 2.0)
        v = np.array([-math.sin(rad), math.cos(rad)]) * (self._h / 2.0)
        c = np.array([self._x, self._y])
        return np.array([c - u - v, c + u - v, c + u + v, c - u + v])

    def hull(self):
        """Axis-aligned bounding box ``(x1, y1, x2, y2)``."""
        corners = self.corners()
        return np.concatenate([corners.min(axis=0), corners.max(axis=0)])

    def rotated(self, degrees):
        return GraspRect(self._x, self._y, self._w, self._h, self._theta + degrees)

    def to_dict(self):
        return {'x': self._x, 'y': self._y, 'w': self._w, 'h': self._h, 'theta_deg': self._theta}

    def __eq__(self, other):
        return (
            isinstance(other, GraspRect)
            and (self._x, self._y, self._w, self._h, self._theta)
            == (other._x, other._y, other._w, other._h, other._theta)
        )

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'GraspRect(x={:.2f}, y={:.2f}, w={:.2f}, h={:.2f}, theta={:.2f})'.format(
            self._x, self._y, self._w, self._h, self._theta)


class GraspCandidate(object):
    """
    A detected grasp.

    :param rect: the refined :class:`GraspRect`
    :param bin: winning orientation bin, 1..20
    :param confidence: softmax confidence of `bin` over all 21 outputs
    :param anchor_index: index of the anchor the proposal came from
    """

    def __init__(self, rect, bin, confidence, anchor_index=0):
        self._rect = rect
        self._bin = int(bin)
        self._confidence = float(confidence)
        self._anchor_index = int(anchor_index)

    @property
    def rect(self):
        return self._rect

    @property
    def bin(self):
        return self._bin

    @property
    def confidence(self):
        return self._confidence

    @property
    def anchor_index(self):
        return self._anchor_index

    def to_dict(self):
        d = self._rect.to_dict()
        d['bin'] = self._bin
        d['confidence'] = self._confidence
        return d

    def __repr__(self):
        return 'GraspCandidate({!r}, bin={}, confidence={:.4f})'.format(
            self._rect, self._bin, self._confidence)


def polygon_area(points):
    """Signed shoelace area; positive for counter-clockwise in x-right/y-up axes."""
    points = np.asarray(points, dtype=np.float64)

    if len(points) < 3:
        return 0.0

    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def clip_polygon(subject, clip):
    """Intersection of polygon `subject` with convex polygon `clip`."""
    orientation = 1.0 if polygon_area(clip) >= 0 else -1.0
    output = [tuple(p) for p in np.asarray(subject, dtype=np.float64)]
    clip = [tuple(p) for p in np.asarray(clip, dtype=np.float64)]

    def side(a, b, p):
        return orientation * ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]))

    for i in range(len(clip)):
        if not output:
            break

        a = clip[i]
        b = clip[(i + 1) % len(clip)]
        points = output
        output = []

        for j in range(len(points)):
            current = points[j]
            previous = points[j - 1]
            s_cur = side(a, b, current)
            s_prev = side(a, b, previous)

            if s_cur >= 0:
                if s_prev < 0:
                    t = s_prev / (s_prev - s_cur)
                    output.append((
                        previous[0] + t * (current[0] - previous[0]),
                        previous[1] + t * (current[1] - previous[1])))

                output.append(current)
            elif s_prev >= 0:
                t = s_prev / (s_prev - s_cur)
                output.append((
                    previous[0] + t * (current[0] - previous[0]),
                    previous[1] + t * (current[1] - previous[1])))

    return np.array(output, dtype=np.float64).reshape(-1, 2)


def rect_iou(g1, g2):
    """Intersection over union of two oriented rectangles."""
    inter = abs(polygon_area(clip_polygon(g1.corners(), g2.corners())))
    union = g1.area + g2.area - inter

    if union <= 0:
        return 0.0

    return min(max(inter / union, 0.0), 1.0)


def is_success(pred, truths):
    """
    True when some truth lies within 30 degrees of `pred` and overlaps
    it with an IoU above 0.25.
    """
    truths = list(truths)

    if not truths:
        raise Error('Expected at least one ground-truth rectangle.')

    rect = pred.rect if isinstance(pred, GraspCandidate) else pred

    for truth in truths:
        if angle_difference(rect.theta, truth.theta) <= SUCCESS_ANGLE and rect_iou(rect, truth) > SUCCESS_IOU:
            return True

    return False
