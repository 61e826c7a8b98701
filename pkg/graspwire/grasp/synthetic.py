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

"""Toy multi-object grasp scenes: flat bars on a plain background."""

import math

import numpy as np
from PIL import Image
from PIL import ImageDraw

from .. import images
from .annotation import Scene
from .rect import GraspRect

BACKGROUND = (200, 200, 200)


def _bar_corners(cx, cy, length, thickness, angle):
    rad = math.radians(angle)
    u = np.array([math.cos(rad), math.sin(rad)]) * (length / 2.0)
    v = np.array([-math.sin(rad), math.cos(rad)]) * (thickness / 2.0)
    c = np.array([cx, cy])
    return [tuple(p) for p in (c - u - v, c + u - v, c + u + v, c - u + v)]


def bar_grasps(cx, cy, length, thickness, angle):
    """
    Grasps across a bar: one at its center and one at each quarter
    point, the opening spanning the thickness.
    """
    rad = math.radians(angle)
    rects = []

    for offset in (-0.25, 0.0, 0.25):
        x = cx + offset * length * math.cos(rad)
        y = cy + offset * length * math.sin(rad)
        rects.append(GraspRect(x, y, thickness * 1.6, thickness * 0.9, angle + 90.0))

    return rects


def make_scene(rng, objects=1, height=images.HEIGHT, width=images.WIDTH, name=''):
    """
    Draw `objects` non-overlapping bars and return a :class:`Scene`
    whose objects each carry three grasp rectangles.
    """
    img = Image.new('RGB', (width, height), BACKGROUND)
    draw = ImageDraw.Draw(img)
    placed = []
    scene_objects = []
    attempts = 0

    while len(scene_objects) < objects and attempts < 200 * max(objects, 1):
        attempts += 1
        length = float(rng.uniform(50.0, 80.0))
        thickness = float(rng.uniform(14.0, 22.0))
        angle = float(rng.uniform(-90.0, 90.0))
        margin = length / 2.0 + thickness
        cx = float(rng.uniform(margin, width - margin)) if width > 2 * margin else width / 2.0
        cy = float(rng.uniform(margin, height - margin)) if height > 2 * margin else height / 2.0

        if any(math.hypot(cx - px, cy - py) < (length + pl) / 2.0 + 4.0 for px, py, pl in placed):
            continue

        fill = tuple(int(v) for v in rng.integers(0, 150, size=3))
        draw.polygon(_bar_corners(cx, cy, length, thickness, angle), fill=fill)
        placed.append((cx, cy, length))
        scene_objects.append(bar_grasps(cx, cy, length, thickness, angle))

    pixels = np.asarray(img, dtype=np.uint8).transpose(2, 0, 1)
    return Scene(images.normalize(pixels), scene_objects, name)


def make_scenes(count, seed=0, max_objects=3, height=images.HEIGHT, width=images.WIDTH):
    rng = np.random.default_rng(seed)
    return [
        make_scene(rng, int(rng.integers(1, max_objects + 1)), height, width, 'scene{:03d}'.format(i))
        for i in range(count)
    ]


def blank_scene(height=images.HEIGHT, width=images.WIDTH):
    pixels = np.empty((3, height, width), dtype=np.uint8)
    pixels[:] = np.array(BACKGROUND, dtype=np.uint8)[:, None, None]
    return Scene(images.normalize(pixels), [], 'blank')
