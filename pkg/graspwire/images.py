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

import logging

import numpy as np
from PIL import Image
from PIL import ImageDraw
from PIL import ImageFilter

from .errors import Error
from .errors import ShapeError
from .utils import format_shape

LOGGER = logging.getLogger(__name__)

HEIGHT = 210
WIDTH = 150


def normalize(pixels):
    """Map ``[0, 255]`` pixels linearly onto ``[-1, 1]``."""
    return (np.asarray(pixels, dtype=np.float32) / np.float32(127.5) - np.float32(1.0)).astype(np.float32)


def denormalize(values):
    """Map ``[-1, 1]`` values back onto float ``[0, 255]``."""
    return (np.clip(np.asarray(values, dtype=np.float64), -1.0, 1.0) + 1.0) * 127.5


def to_uint8(values):
    return np.round(denormalize(values)).astype(np.uint8)


def load_pixels(path, height=HEIGHT, width=WIDTH):
    """
    Read an image file as a ``3×height×width`` uint8 array.

    Images of another size are resized with bilinear filtering.
    """
    try:
        with Image.open(path) as img:
            img = img.convert('RGB')

            if img.size != (width, height):
                LOGGER.debug('Resizing %s from %s to %dx%d.', path, img.size, width, height)
                img = img.resize((width, height), Image.BILINEAR)

            pixels = np.asarray(img, dtype=np.uint8)
    except (OSError, ValueError) as e:
        raise Error('Cannot read image {}: {}'.format(path, e))

    return np.ascontiguousarray(pixels.transpose(2, 0, 1))


def load_image(path, height=HEIGHT, width=WIDTH):
    """Read an image file as a normalized ``3×height×width`` float32 array."""
    return normalize(load_pixels(path, height, width))


def save_pixels(path, pixels):
    pixels = np.asarray(pixels)

    if pixels.ndim != 3 or pixels.shape[0] != 3:
        raise ShapeError(
            'Expected a 3×H×W image, but got shape {}.'.format(format_shape(pixels.shape)))

    Image.fromarray(np.ascontiguousarray(pixels.transpose(1, 2, 0).astype(np.uint8)), 'RGB').save(path)


def save_image(path, values):
    """Write a normalized ``3×H×W`` array as an 8-bit RGB file."""
    save_pixels(path, to_uint8(values))


def synthetic_images(count, seed=0, height=HEIGHT, width=WIDTH, blur=1.0):
    """
    Toy images with structure at several scales.

    Each image is a two-colour gradient carrying a sinusoidal luminance
    grating, overlaid with flat high-contrast ellipses and rectangles and
    a light Gaussian blur. Returns a normalized ``count×3×height×width``
    float32 array. The same seed always yields the same images.
    """
    rng = np.random.default_rng(seed)
    out = np.empty((count, 3, height, width), dtype=np.float32)
    ramp = np.linspace(0.0, 1.0, height)[:, None, None]
    rows, cols = np.mgrid[0:height, 0:width]

    for index in range(count):
        top, bottom = rng.uniform(30, 225, size=(2, 3))
        background = top * (1.0 - ramp) + bottom * ramp
        angle = rng.uniform(0.0, np.pi)
        period = rng.uniform(16.0, 40.0)
        amplitude = rng.uniform(10.0, 30.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        wave = np.sin(
            2.0 * np.pi * (cols * np.cos(angle) + rows * np.sin(angle)) / period + phase)
        background = np.clip(background + amplitude * wave[:, :, None], 0, 255)
        img = Image.fromarray(np.round(background).astype(np.uint8), 'RGB')
        draw = ImageDraw.Draw(img)

        for _ in range(int(rng.integers(3, 7))):
            x0 = int(rng.integers(0, width - 20))
            y0 = int(rng.integers(0, height - 20))
            x1 = x0 + int(rng.integers(12, max(13, width // 3)))
            y1 = y0 + int(rng.integers(12, max(13, height // 3)))
            fill = tuple(int(v) for v in rng.integers(0, 256, size=3))

            if rng.random() < 0.5:
                draw.ellipse([x0, y0, x1, y1], fill=fill)
            else:
                draw.rectangle([x0, y0, x1, y1], fill=fill)

        if blur:
            img = img.filter(ImageFilter.GaussianBlur(blur))

        out[index] = normalize(np.asarray(img, dtype=np.uint8).transpose(2, 0, 1))

    return out
