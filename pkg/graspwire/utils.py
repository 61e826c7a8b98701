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

import hashlib
from collections import namedtuple

import numpy as np
import bitstruct

try:
    import bitstruct.c as bitstruct_compiler
except ImportError:
    bitstruct_compiler = bitstruct


Formats = namedtuple(
    'Formats',
    ['compiled', 'swap', 'size', 'names']
)


def format_shape(shape):
    return '×'.join(str(extent) for extent in shape)


def create_little_endian_formats(fields):
    """
    Compile a fixed record of whole-byte fields.

    `fields` is a sequence of ``(name, kind, bits)`` tuples where `kind`
    is a bitstruct type character (``u``, ``s``, ``f`` or ``r``). The
    record is packed big endian by bitstruct and then byte swapped per
    field, so every multi-byte field ends up little endian on the wire.
    """
    fmt = ''
    swap = ''
    names = []

    for name, kind, bits in fields:
        if bits % 8:
            raise ValueError(
                'Expected a whole number of bytes for field {}, '
                'but got {} bits.'.format(name, bits))

        fmt += '{}{}'.format(kind, bits)
        # raw fields keep their byte order
        swap += '1' * (bits // 8) if kind == 'r' else str(bits // 8)
        names.append(name)

    size = sum(bits for _, _, bits in fields) // 8
    compiled = bitstruct_compiler.compile(fmt, names)

    return Formats(compiled, swap, size, names)


def pack_little_endian(formats, values):
    packed = formats.compiled.pack(values)
    return bitstruct.byteswap(formats.swap, packed)


def unpack_little_endian(formats, data):
    data = bytes(data[:formats.size])

    if len(data) < formats.size:
        raise ValueError(
            'Expected {} bytes, but got {}.'.format(formats.size, len(data)))

    return formats.compiled.unpack(bitstruct.byteswap(formats.swap, data))


def content_hash(arrays):
    """64-bit content hash over the little-endian float32 bytes of `arrays`."""
    digest = hashlib.blake2b(digest_size=8)

    for array in arrays:
        digest.update(np.ascontiguousarray(array, dtype='<f4').tobytes())

    return int.from_bytes(digest.digest(), 'little')
