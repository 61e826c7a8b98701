
import io

import numpy as np
import pytest

from graspwire.codec import Latent
from graspwire.codec import encode
from graspwire.errors import BadMagicError
from graspwire.errors import CrcMismatchError
from graspwire.errors import DecodeError
from graspwire.errors import EncodeError
from graspwire.errors import LengthMismatchError
from graspwire.errors import MessageTooLargeError
from graspwire.errors import ProtocolError
from graspwire.errors import UnknownElementKindError
from graspwire.errors import UnsupportedVersionError
from graspwire.netproto.frame import CRC_SIZE
from graspwire.netproto.frame import HEADER_SIZE
from graspwire.netproto.frame import CompressedFrame
from graspwire.netproto.frame import frame_decode
from graspwire.netproto.frame import frame_encode
from graspwire.netproto.frame import read_message
from graspwire.netproto.frame import wire_size
from graspwire.netproto.frame import write_message


def small_frame(seed=0, shape=(1, 2, 2), model_id=0x0123456789abcdef):
    data = np.random.default_rng(seed).normal(size=shape).astype(np.float32)
    return CompressedFrame(model_id, data).encode()


def test_header_layout():
    assert HEADER_SIZE == 21
    assert CRC_SIZE == 4

    data = small_frame()
    assert data[:4] == b'GWF1'
    assert data[4:6] == b'\x01\x00'
    assert data[6:14] == bytes.fromhex('efcdab8967452301')
    assert data[14:20] == b'\x01\x00\x02\x00\x02\x00'
    assert data[20] == 0
    assert len(data) == 21 + 16 + 4


def test_latent_round_trip(rng):
    latent = Latent(rng.normal(size=(2, 52, 37)).astype(np.float32), 2 ** 64 - 1)
    data = frame_encode(latent)

    assert len(data) == 21 + 15392 + 4 == wire_size((2, 52, 37))
    assert frame_decode(data) == latent


def test_special_values_survive():
    values = np.array([[[np.nan, np.inf], [-np.inf, -0.0]]], dtype=np.float32)
    frame = CompressedFrame.decode(CompressedFrame(1, values).encode())

    np.testing.assert_array_equal(frame.latent().data.view(np.uint32), values.view(np.uint32))


def test_wire_size_matches_encoding(codec, toy_images):

    frame = CompressedFrame.from_latent(encode(codec, toy_images[0]))

    assert frame.shape == (2, 52, 37)
    assert frame.wire_size == len(frame.encode()) == 15417


def test_bad_magic():
    data = bytearray(small_frame())
    data[0:4] = b'XXXX'

    with pytest.raises(BadMagicError):
        CompressedFrame.decode(data)


def test_unsupported_version():
    data = bytearray(small_frame())
    data[4] = 2

    with pytest.raises(UnsupportedVersionError):
        CompressedFrame.decode(data)


def test_unknown_element_kind():
    data = bytearray(small_frame())
    data[20] = 1

    with pytest.raises(UnknownElementKindError):
        CompressedFrame.decode(data)


@pytest.mark.parametrize('cut', [0, 10, 24, 40])
def test_truncated(cut):
    with pytest.raises(LengthMismatchError):
        CompressedFrame.decode(small_frame()[:cut])


def test_trailing_bytes():
    with pytest.raises(LengthMismatchError):
        CompressedFrame.decode(small_frame() + b'\x00')


def test_extent_mismatch():
    data = bytearray(small_frame())
    data[14] = 2

    with pytest.raises(LengthMismatchError):
        CompressedFrame.decode(data)


def test_zero_extent():
    data = bytearray(small_frame())
    data[16:18] = b'\x00\x00'

    with pytest.raises(DecodeError):
        CompressedFrame.decode(data)


@pytest.mark.parametrize('position', [6, 25, -1])
def test_bit_flip_breaks_crc(position):
    data = bytearray(small_frame())
    data[position] ^= 0x01

    with pytest.raises(CrcMismatchError):
        CompressedFrame.decode(data)


def test_encode_validation():
    with pytest.raises(EncodeError):
        CompressedFrame(0, np.zeros((2, 2)))

    with pytest.raises(EncodeError):
        CompressedFrame(0, np.zeros((0, 2, 2)))

    with pytest.raises(EncodeError):
        CompressedFrame(-1, np.zeros((1, 2, 2)))

    with pytest.raises(EncodeError):
        CompressedFrame(2 ** 64, np.zeros((1, 2, 2)))

    with pytest.raises(EncodeError):
        CompressedFrame(0, np.zeros((1, 2, 2)), element_kind=9)


def mutate(data, rng):
    data = bytearray(data)
    kind = rng.integers(5)

    if kind == 0:
        data[rng.integers(len(data))] ^= 1 << int(rng.integers(8))
    elif kind == 1:
        data[rng.integers(len(data))] = int(rng.integers(256))
    elif kind == 2:
        data = data[:rng.integers(len(data))]
    elif kind == 3:
        data += bytes(rng.integers(0, 256, size=int(rng.integers(1, 8)), dtype=np.uint8))
    else:
        data = bytearray(rng.integers(0, 256, size=int(rng.integers(0, 64)), dtype=np.uint8))

    return bytes(data)


@pytest.mark.fuzz
def test_mutations_only_raise_decode_errors():
    rng = np.random.default_rng(99)
    originals = [small_frame(seed, shape) for seed, shape in enumerate([(1, 1, 1), (1, 2, 2), (2, 1, 3)])]

    for i in range(100000):
        original = originals[i % len(originals)]
        data = mutate(original, rng)

        try:
            frame = CompressedFrame.decode(data)
        except DecodeError:
            continue

        assert frame.encode() == data


def test_messages_on_a_stream():
    stream = io.BytesIO()
    write_message(stream, b'first')
    write_message(stream, b'')
    write_message(stream, b'third')
    stream.seek(0)

    assert read_message(stream) == b'first'
    assert read_message(stream) == b''
    assert read_message(stream) == b'third'
    assert read_message(stream) is None


@pytest.mark.parametrize('data', [b'\x05\x00', b'\x05\x00\x00\x00abc'])
def test_partial_message(data):
    with pytest.raises(ProtocolError):
        read_message(io.BytesIO(data))


def test_oversized_message_is_refused_before_reading():
    stream = io.BytesIO(b'\x00\x10\x00\x00' + b'x' * 16)

    with pytest.raises(MessageTooLargeError):
        read_message(stream, max_size=1024)

    assert stream.tell() == 4
