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
Binary parameter files.

Layout, all little endian::

    magic (4 bytes) | version u16 | config block | parameter count u64 |
    float32 values in declaration order | content hash u64

The codec uses magic ``GWM1`` and hashes its decoder parameters (the
model_id); the grasp detector uses ``GWD1`` and hashes all parameters.
"""

import logging

import numpy as np

from .errors import CheckpointFormatError
from .errors import CheckpointMismatchError
from .errors import CheckpointTruncatedError
from .utils import create_little_endian_formats
from .utils import pack_little_endian
from .utils import unpack_little_endian
from .codec import CodecConfig
from .codec import CodecModel

LOGGER = logging.getLogger(__name__)

CODEC_MAGIC = b'GWM1'
DETECTOR_MAGIC = b'GWD1'
VERSION = 1

_PREAMBLE = create_little_endian_formats([
    ('magic', 'r', 32),
    ('version', 'u', 16),
])

_CODEC_CONFIG = create_little_endian_formats([
    ('channels', 'u', 32),
    ('height', 'u', 32),
    ('width', 'u', 32),
    ('latent_channels', 'u', 32),
    ('extra_downsample_stages', 'u', 32),
    ('residual_blocks', 'u', 32),
    ('features', 'u', 32),
])

_COUNT = create_little_endian_formats([('count', 'u', 64)])
_HASH = create_little_endian_formats([('hash', 'u', 64)])


def write_parameter_file(path, magic, config_formats, config_values, arrays, digest):
    count = int(sum(np.asarray(a).size for a in arrays))
    chunks = [
        pack_little_endian(_PREAMBLE, {'magic': magic, 'version': VERSION}),
        pack_little_endian(config_formats, config_values),
        pack_little_endian(_COUNT, {'count': count}),
    ]
    chunks.extend(np.ascontiguousarray(a, dtype='<f4').tobytes() for a in arrays)
    chunks.append(pack_little_endian(_HASH, {'hash': digest}))

    with open(path, 'wb') as fout:
        fout.write(b''.join(chunks))

    LOGGER.info('Wrote %d parameters to %s.', count, path)


def read_parameter_file(path, magic, config_formats):
    """Return ``(config values, flat float32 values, stored hash)``."""
    with open(path, 'rb') as fin:
        data = fin.read()

    if len(data) < _PREAMBLE.size:
        raise CheckpointTruncatedError(
            'Expected at least {} bytes, but got {}.'.format(_PREAMBLE.size, len(data)))

    preamble = unpack_little_endian(_PREAMBLE, data)

    if preamble['magic'] != magic:
        raise CheckpointFormatError(
            'Expected magic {!r}, but got {!r}.'.format(magic, preamble['magic']))

    if preamble['version'] != VERSION:
        raise CheckpointFormatError(
            'Expected format version {}, but got {}.'.format(VERSION, preamble['version']))

    offset = _PREAMBLE.size
    head = offset + config_formats.size + _COUNT.size

    if len(data) < head:
        raise CheckpointTruncatedError(
            'Expected a {} byte header, but the file has {} bytes.'.format(head, len(data)))

    config = unpack_little_endian(config_formats, data[offset:])
    offset += config_formats.size
    count = unpack_little_endian(_COUNT, data[offset:])['count']
    offset += _COUNT.size
    expected = offset + 4 * count + _HASH.size

    if len(data) < expected:
        raise CheckpointTruncatedError(
            'Expected {} bytes for {} parameters, but the file has {}.'.format(
                expected, count, len(data)))

    if len(data) > expected:
        raise CheckpointFormatError(
            'Found {} unexpected trailing bytes.'.format(len(data) - expected))

    values = np.frombuffer(data, dtype='<f4', count=count, offset=offset).astype(np.float32)
    digest = unpack_little_endian(_HASH, data[offset + 4 * count:])['hash']

    return config, values, digest


def split_values(values, shapes):
    arrays = []
    offset = 0

    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(values[offset:offset + size].reshape(shape).copy())
        offset += size

    return arrays


def save_checkpoint(model, path):
    """Store a :class:`~graspwire.codec.CodecModel`."""
    config = model.config
    values = {
        'channels': config.input_shape[0],
        'height': config.input_shape[1],
        'width': config.input_shape[2],
        'latent_channels': config.latent_channels,
        'extra_downsample_stages': config.extra_downsample_stages,
        'residual_blocks': config.residual_blocks,
        'features': config.features,
    }
    write_parameter_file(
        path, CODEC_MAGIC, _CODEC_CONFIG, values, model.parameter_arrays(), model.model_id)


def load_checkpoint(path):
    """
    Load a :class:`~graspwire.codec.CodecModel` stored by :func:`save_checkpoint`.

    Raises :class:`CheckpointFormatError` for a foreign or unsupported
    file, :class:`CheckpointTruncatedError` for a short file and
    :class:`CheckpointMismatchError` when the parameter count or decoder
    hash disagree with the stored configuration.
    """
    values, flat, digest = read_parameter_file(path, CODEC_MAGIC, _CODEC_CONFIG)

    try:
        config = CodecConfig(
            (values['channels'], values['height'], values['width']),
            values['latent_channels'],
            values['extra_downsample_stages'],
            values['residual_blocks'],
            values['features']
        )
    except Exception as e:
        raise CheckpointMismatchError('Invalid stored configuration: {}'.format(e))

    model = CodecModel(config)
    shapes = [p.shape for p in model.parameters()]
    expected = int(sum(np.prod(s) for s in shapes))

    if flat.size != expected:
        raise CheckpointMismatchError(
            'Expected {} parameters for {}, but got {}.'.format(expected, config, flat.size))

    model.load_parameter_arrays(split_values(flat, shapes))

    if model.model_id != digest:
        raise CheckpointMismatchError(
            'Expected decoder hash 0x{:016x}, but got 0x{:016x}.'.format(digest, model.model_id))

    LOGGER.info('Loaded codec 0x%016x from %s.', digest, path)
    return model
