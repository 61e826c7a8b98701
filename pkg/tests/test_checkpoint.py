
import numpy as np
import pytest

from graspwire.checkpoint import load_checkpoint
from graspwire.checkpoint import save_checkpoint
from graspwire.codec import CodecConfig
from graspwire.codec import CodecModel
from graspwire.codec import decode
from graspwire.codec import encode
from graspwire.errors import CheckpointError
from graspwire.errors import CheckpointFormatError
from graspwire.errors import CheckpointMismatchError
from graspwire.errors import CheckpointTruncatedError
from graspwire.grasp.detector import DetectorConfig
from graspwire.grasp.detector import DetectorModel
from graspwire.grasp.detector import load_detector
from graspwire.grasp.detector import save_detector


@pytest.fixture
def small_codec():
    return CodecModel(CodecConfig(latent_channels=1, residual_blocks=1, features=4), seed=21)


@pytest.fixture
def codec_path(tmp_path, small_codec):
    path = str(tmp_path / 'codec.gwm')
    save_checkpoint(small_codec, path)
    return path


def read(path):
    with open(path, 'rb') as fin:
        return bytearray(fin.read())


def write(path, data):
    with open(path, 'wb') as fout:
        fout.write(bytes(data))


def test_round_trip(codec_path, small_codec, toy_images):
    loaded = load_checkpoint(codec_path)

    assert loaded.config == small_codec.config
    assert loaded.model_id == small_codec.model_id

    for stored, original in zip(loaded.parameter_arrays(), small_codec.parameter_arrays()):
        np.testing.assert_array_equal(stored, original)

    assert encode(loaded, toy_images[0]) == encode(small_codec, toy_images[0])
    np.testing.assert_array_equal(
        decode(loaded, encode(loaded, toy_images[0])),
        decode(small_codec, encode(small_codec, toy_images[0])))


def test_file_starts_with_magic(codec_path):
    assert read(codec_path)[:4] == b'GWM1'


def test_bad_magic(codec_path):
    data = read(codec_path)
    data[:4] = b'GWD1'
    write(codec_path, data)

    with pytest.raises(CheckpointFormatError):
        load_checkpoint(codec_path)


def test_bad_version(codec_path):
    data = read(codec_path)
    data[4] = 7
    write(codec_path, data)

    with pytest.raises(CheckpointFormatError):
        load_checkpoint(codec_path)


@pytest.mark.parametrize('keep', [0, 3, 20, 100])
def test_truncated(codec_path, keep):
    write(codec_path, read(codec_path)[:keep])

    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(codec_path)


def test_truncated_tail(codec_path):
    write(codec_path, read(codec_path)[:-1])

    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(codec_path)


def test_trailing_bytes(codec_path):
    write(codec_path, read(codec_path) + b'\x00')

    with pytest.raises(CheckpointFormatError):
        load_checkpoint(codec_path)


def test_corrupted_decoder_value(codec_path):
    data = read(codec_path)
    # last stored float belongs to the decoder output bias
    data[-9] ^= 0x40
    write(codec_path, data)

    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(codec_path)


def test_corrupted_hash(codec_path):
    data = read(codec_path)
    data[-1] ^= 0x01
    write(codec_path, data)

    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(codec_path)


def test_invalid_stored_config(codec_path):
    data = read(codec_path)
    # latent_channels field follows magic, version and three u32 extents
    data[6 + 12:6 + 16] = (3).to_bytes(4, 'little')
    write(codec_path, data)

    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(codec_path)


def test_errors_share_base(codec_path):
    write(codec_path, b'')

    with pytest.raises(CheckpointError):
        load_checkpoint(codec_path)


def test_detector_round_trip(tmp_path):
    config = DetectorConfig(features=(4, 4, 8, 8), hidden=8, nms_threshold=0.25)
    model = DetectorModel(config, seed=2)
    path = str(tmp_path / 'detector.gwd')
    save_detector(model, path)
    loaded = load_detector(path)

    assert read(path)[:4] == b'GWD1'
    assert loaded.config == config
    assert loaded.model_id == model.model_id
    np.testing.assert_array_equal(loaded.anchors, model.anchors)


def test_detector_file_is_not_a_codec(tmp_path):
    path = str(tmp_path / 'detector.gwd')
    save_detector(DetectorModel(DetectorConfig(features=(4, 4, 8, 8), hidden=8), seed=2), path)

    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)
