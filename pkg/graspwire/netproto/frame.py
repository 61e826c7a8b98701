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
Binary frame carrying one latent from the edge to the cloud.

Layout, all fields little endian::

    magic         4  b'GWF1'
    version       2
    model_id      8  content hash of the paired decoder
    channels      2
    height        2
    width         2
    element_kind  1  0 = 32-bit float
    payload       channels * height * width * element size
    crc32         4  over header and payload

On a stream every frame, and every reply, is preceded by a 4-byte
length.
"""

import zlib

import numpy as np

from ..codec import Latent
from ..errors import BadMagicError
from ..errors import DecodeError
from ..errors import EncodeError
from ..errors import CrcMismatchError
from ..errors import LengthMismatchError
from ..errors import MessageTooLargeError
from ..errors import ProtocolError
from ..errors import UnknownElementKindError
from ..errors import UnsupportedVersionError
from ..utils import create_little_endian_formats
from ..utils import format_shape
from ..utils import pack_little_endian
from ..utils import unpack_little_endian

MAGIC = b'GWF1'
VERSION = 1

ELEMENT_FLOAT32 = 0

# element kind -> numpy little-endian dtype
ELEMENT_KINDS = {ELEMENT_FLOAT32: np.dtype('<f4')}

_HEADER = create_little_endian_formats([
    ('magic', 'r', 32),
    ('version', 'u', 16),
    ('model_id', 'u', 64),
    ('channels', 'u', 16),
    ('height', 'u', 16),
    ('width', 'u', 16),
    ('element_kind', 'u', 8),
])
_CRC = create_little_endian_formats([('crc', 'u', 32)])
_LENGTH = create_little_endian_formats([('length', 'u', 32)])

HEADER_SIZE = _HEADER.size
CRC_SIZE = _CRC.size
LENGTH_PREFIX_SIZE = _LENGTH.size

DEFAULT_MAX_MESSAGE_SIZE = 16 * 1024 * 1024


def _crc(data):
    return zlib.crc32(data) & 0xffffffff


class CompressedFrame(object):
    """
    A latent plus the metadata needed to decode it.

    :param model_id: 64-bit decoder hash
    :param data: ``C×H×W`` array
    :param element_kind: payload element encoding
    """

    def __init__(self, model_id, data, element_kind=ELEMENT_FLOAT32):
        if element_kind not in ELEMENT_KINDS:
            raise EncodeError('Unknown element kind {}.'.format(element_kind))

        data = np.asarray(data)

        if data.ndim != 3:
            raise EncodeError(
                'Expected a C×H×W latent, but got shape {}.'.format(format_shape(data.shape)))

        if min(data.shape) < 1 or max(data.shape) > 0xffff:
            raise EncodeError(
                'Expected latent extents in 1..65535, but got {}.'.format(format_shape(data.shape)))

        if not 0 <= int(model_id) <= 0xffffffffffffffff:
            raise EncodeError('Expected a 64-bit model id, but got {}.'.format(model_id))

        self._model_id = int(model_id)
        self._element_kind = element_kind
        self._data = np.ascontiguousarray(data, dtype=ELEMENT_KINDS[element_kind])

    @classmethod
    def from_latent(cls, latent):
        return cls(latent.model_id, latent.data)

    @property
    def model_id(self):
        return self._model_id

    @property
    def shape(self):
        return self._data.shape

    @property
    def element_kind(self):
        return self._element_kind

    @property
    def payload_size(self):
        return self._data.nbytes

    @property
    def wire_size(self):
        """Bytes of the encoded frame, without the stream length prefix."""
        return HEADER_SIZE + self.payload_size + CRC_SIZE

    def latent(self):
        return Latent(self._data, self._model_id)

    def encode(self):
        channels, height, width = self._data.shape
        header = pack_little_endian(
            _HEADER,
            {
                'magic': MAGIC,
                'version': VERSION,
                'model_id': self._model_id,
                'channels': channels,
                'height': height,
                'width': width,
                'element_kind': self._element_kind,
            })
        body = header + self._data.tobytes()

        return body + pack_little_endian(_CRC, {'crc': _crc(body)})

    @classmethod
    def decode(cls, data):
        """
        Parse an encoded frame.

        Every malformed input raises a :class:`DecodeError` subclass.
        """
        data = bytes(data)

        if len(data) < HEADER_SIZE + CRC_SIZE:
            raise LengthMismatchError(
                'Expected at least {} bytes, but got {}.'.format(HEADER_SIZE + CRC_SIZE, len(data)))

        header = unpack_little_endian(_HEADER, data)

        if header['magic'] != MAGIC:
            raise BadMagicError(
                'Expected magic {!r}, but got {!r}.'.format(MAGIC, header['magic']))

        if header['version'] != VERSION:
            raise UnsupportedVersionError(
                'Expected frame version {}, but got {}.'.format(VERSION, header['version']))

        dtype = ELEMENT_KINDS.get(header['element_kind'])

        if dtype is None:
            raise UnknownElementKindError(
                'Unknown element kind {}.'.format(header['element_kind']))

        shape = (header['channels'], header['height'], header['width'])

        if min(shape) == 0:
            raise DecodeError('Expected non-zero extents, but got {}.'.format(format_shape(shape)))

        payload_size = shape[0] * shape[1] * shape[2] * dtype.itemsize
        expected = HEADER_SIZE + payload_size + CRC_SIZE

        if len(data) != expected:
            raise LengthMismatchError(
                'Expected {} bytes for a {} frame, but got {}.'.format(
                    expected, format_shape(shape), len(data)))

        body = data[:-CRC_SIZE]
        crc = unpack_little_endian(_CRC, data[-CRC_SIZE:])['crc']

        if crc != _crc(body):
            raise CrcMismatchError(
                'Expected CRC 0x{:08x}, but got 0x{:08x}.'.format(_crc(body), crc))

        values = np.frombuffer(body, dtype=dtype, offset=HEADER_SIZE).reshape(shape).copy()

        return cls(header['model_id'], values, header['element_kind'])

    def __repr__(self):
        return 'CompressedFrame(model_id=0x{:016x}, shape={}, element_kind={})'.format(
            self._model_id, format_shape(self.shape), self._element_kind)


def frame_encode(latent):
    return CompressedFrame.from_latent(latent).encode()


def frame_decode(data):
    return CompressedFrame.decode(data).latent()


def wire_size(latent_shape, element_kind=ELEMENT_FLOAT32):
    channels, height, width = latent_shape
    return HEADER_SIZE + channels * height * width * ELEMENT_KINDS[element_kind].itemsize + CRC_SIZE


def write_message(stream, payload):
    """Write `payload` to a binary stream behind its 4-byte length."""
    stream.write(pack_little_endian(_LENGTH, {'length': len(payload)}))
    stream.write(payload)
    stream.flush()


def _read_exactly(stream, size):
    chunks = []
    remaining = size

    while remaining:
        chunk = stream.read(remaining)

        if not chunk:
            break

        chunks.append(chunk)
        remaining -= len(chunk)

    return b''.join(chunks)


def read_message(stream, max_size=DEFAULT_MAX_MESSAGE_SIZE):
    """
    Read one length-prefixed message.

    Returns ``None`` when the stream ends cleanly between messages. A
    declared length above `max_size` raises
    :class:`MessageTooLargeError` before any of the body is read.
    """
    prefix = _read_exactly(stream, LENGTH_PREFIX_SIZE)

    if not prefix:
        return None

    if len(prefix) < LENGTH_PREFIX_SIZE:
        raise ProtocolError('Stream ended inside a length prefix.')

    length = unpack_little_endian(_LENGTH, prefix)['length']

    if length > max_size:
        raise MessageTooLargeError(
            'Expected at most {} bytes, but the peer declared {}.'.format(max_size, length))

    body = _read_exactly(stream, length)

    if len(body) != length:
        raise ProtocolError(
            'Expected a {} byte message, but the stream ended after {}.'.format(length, len(body)))

    return body
