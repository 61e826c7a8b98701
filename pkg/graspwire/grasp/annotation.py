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
Rectangle annotation files and dataset indices.

An annotation file lists rectangles as groups of four vertex lines, each
line holding whitespace-separated ``x y`` coordinates. A dataset index is
a JSON object mapping image paths to annotation paths, both relative to
the index file.
"""

import json
import logging
import math
import os
import re

import numpy as np
import textparser
from textparser import Sequence
from textparser import ZeroOrMore
from textparser import choice
from textparser import tokenize_init
from textparser import Token
from textparser import TokenizeError

from ..errors import DatasetError
from ..errors import Error
from ..errors import ParseError
from .. import images
from .rect import GraspRect

LOGGER = logging.getLogger(__name__)


class Parser(textparser.Parser):

    def tokenize(self, string):
        token_specs = [
            ('SKIP', r'[ \t\r]+'),
            ('NL', r'\n'),
            ('NUMBER', r'[-+]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[Nn]a[Nn]|[Ii]nf(?:inity)?)'),
            ('MISMATCH', r'.')
        ]

        tokens, token_regex = tokenize_init(token_specs)

        for mo in re.finditer(token_regex, string, re.DOTALL):
            kind = mo.lastgroup

            if kind == 'SKIP':
                pass
            elif kind != 'MISMATCH':
                tokens.append(Token(kind, mo.group(kind), mo.start()))
            else:
                raise TokenizeError(string, mo.start())

        return tokens

    def grammar(self):
        vertex = Sequence('NUMBER', 'NUMBER', 'NL')
        return ZeroOrMore(choice(vertex, 'NL'))


def _line_of(text, offset):
    return text.count('\n', 0, offset) + 1


def parse_rect_vertices(text):
    """
    Parse annotation text into ``(line, x, y)`` vertex tuples, blank
    lines dropped.
    """
    if text and not text.endswith('\n'):
        text += '\n'

    try:
        tree = Parser().parse(text, token_tree=True)
    except (textparser.ParseError, TokenizeError) as e:
        raise ParseError('Expected "x y" on every line.', e.line)

    vertices = []

    for item in tree:
        if isinstance(item, Token):
            continue

        x, y, _ = item
        vertices.append((_line_of(text, x.offset), float(x.value), float(y.value)))

    return vertices


class AnnotationResult(list):
    """A list of :class:`GraspRect` that also counts skipped groups."""

    def __init__(self, rects=(), skipped=0):
        list.__init__(self, rects)
        self.skipped = skipped


def parse_rect_annotations(text):
    """
    Convert four-vertex groups into :class:`GraspRect` objects.

    Groups with a non-finite coordinate or a zero-length edge are skipped
    and counted in the result's ``skipped`` attribute.
    """
    vertices = parse_rect_vertices(text)

    if len(vertices) % 4:
        start = vertices[len(vertices) - len(vertices) % 4][0]
        raise ParseError(
            'Expected groups of 4 vertex lines, but the last group has {}.'.format(
                len(vertices) % 4),
            start)

    result = AnnotationResult()

    for index in range(0, len(vertices), 4):
        group = vertices[index:index + 4]
        points = [(x, y) for _, x, y in group]

        if not all(math.isfinite(v) for point in points for v in point):
            LOGGER.warning('Skipping rectangle at line %d: non-finite vertex.', group[0][0])
            result.skipped += 1
            continue

        try:
            result.append(GraspRect.from_vertices(points))
        except Error:
            LOGGER.warning('Skipping rectangle at line %d: degenerate edges.', group[0][0])
            result.skipped += 1

    if result.skipped:
        LOGGER.warning('Skipped %d of %d rectangles.', result.skipped, len(vertices) // 4)

    return result


def format_rect_annotations(rects):
    """Inverse of :func:`parse_rect_annotations`."""
    lines = []

    for rect in rects:
        for x, y in rect.corners():
            lines.append('{} {}'.format(repr(float(x)), repr(float(y))))

    return ''.join(line + '\n' for line in lines)


def load_rect_annotations(path):
    with open(path, 'r') as fin:
        return parse_rect_annotations(fin.read())


class Scene(object):
    """
    One image with its ground truth.

    :param image: normalized ``3×H×W`` float32 array
    :param objects: one list of :class:`GraspRect` per object
    :param name: identifier used in reports
    """

    def __init__(self, image, objects, name=''):
        self._image = np.asarray(image, dtype=np.float32)
        self._objects = [list(rects) for rects in objects]
        self._name = name

    @property
    def image(self):
        return self._image

    @property
    def objects(self):
        return self._objects

    @property
    def truths(self):
        return [rect for rects in self._objects for rect in rects]

    @property
    def name(self):
        return self._name

    def __repr__(self):
        return 'Scene({!r}, objects={})'.format(self._name, len(self._objects))


def _group(rects, sizes, name):
    if sizes is None:
        return [[rect] for rect in rects]

    if sum(sizes) != len(rects) or any(size < 1 for size in sizes):
        raise DatasetError(
            'Object sizes {} do not cover the {} rectangles of {}.'.format(sizes, len(rects), name))

    objects = []
    start = 0

    for size in sizes:
        objects.append(list(rects[start:start + size]))
        start += size

    return objects


def load_dataset(index_path):
    """
    Load every scene listed in a JSON index, sorted by image path.

    An index value is either an annotation path or an object with
    ``annotations`` and an optional ``objects`` list giving the number of
    consecutive rectangles per object. Without ``objects`` every
    rectangle counts as its own object.
    """
    try:
        with open(index_path, 'r') as fin:
            index = json.load(fin)
    except (OSError, ValueError) as e:
        raise DatasetError('Cannot read dataset index {}: {}'.format(index_path, e))

    if not isinstance(index, dict):
        raise DatasetError(
            'Expected a JSON object mapping images to annotations, but got {}.'.format(
                type(index).__name__))

    root = os.path.dirname(os.path.abspath(index_path))
    scenes = []

    for image_name in sorted(index):
        entry = index[image_name]
        groups = None

        if isinstance(entry, dict):
            groups = entry.get('objects')
            entry = entry.get('annotations')

        if not isinstance(entry, str):
            raise DatasetError('No annotation path for {}.'.format(image_name))

        annotation_path = os.path.join(root, entry)
        image_path = os.path.join(root, image_name)

        try:
            rects = load_rect_annotations(annotation_path)
        except OSError as e:
            raise DatasetError('Cannot read annotations {}: {}'.format(annotation_path, e))

        scenes.append(Scene(images.load_image(image_path), _group(rects, groups, image_name), image_name))

    LOGGER.info('Loaded %d scenes from %s.', len(scenes), index_path)
    return scenes
