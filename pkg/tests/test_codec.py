
import numpy as np
import pytest

from graspwire.codec import CodecConfig
from graspwire.codec import CodecModel
from graspwire.codec import Latent
from graspwire.codec import compression_ratio
from graspwire.codec import decode
from graspwire.codec import encode
from graspwire.codec import ratio_grid
from graspwire.codec import spatial_chain
from graspwire.errors import EncodeError
from graspwire.errors import Error
from graspwire.errors import ShapeError


def test_spatial_chain():
    assert spatial_chain(CodecConfig()) == [(210, 150), (105, 75), (52, 37)]
    assert spatial_chain(CodecConfig(latent_channels=1, extra_downsample_stages=3))[2:] == [
        (52, 37), (26, 18), (13, 9), (6, 4)]


@pytest.mark.parametrize('channels,elements,ratio', [
    (16, 30784, 32.58),
    (8, 15392, 16.29),
    (4, 7696, 8.14),
    (2, 3848, 4.07),
    (1, 1924, 2.04),
])
def test_base_ratios(channels, elements, ratio):
    config = CodecConfig(latent_channels=channels)

    assert config.latent_shape == (channels, 52, 37)
    assert np.prod(config.latent_shape) == elements
    assert round(config.compression_ratio, 2) == ratio


def test_ratio_grid():
    entries = ratio_grid()
    by_setting = {(e.latent_channels, e.extra_downsample_stages): e for e in entries}

    assert len(entries) == 11
    assert all(e.input_elements == 94500 for e in entries)
    assert by_setting[(8, 0)].bytes_f32 == 61568
    assert by_setting[(8, 0)].bytes_f64 == 123136
    assert by_setting[(16, 0)].printed_elements == 30784
    assert by_setting[(2, 1)].latent_shape == (2, 26, 18)
    assert by_setting[(2, 1)].ratio == 0.99
    assert by_setting[(1, 3)].latent_elements == 24
    assert by_setting[(1, 3)].printed_elements is None

    ratios = [e.ratio for e in entries]
    assert ratios[:5] == sorted(ratios[:5], reverse=True)


def test_compression_ratio_rejects_empty_shapes():
    with pytest.raises(ShapeError):
        compression_ratio((3, 0, 150), (2, 52, 37))


@pytest.mark.parametrize('kwargs', [
    {'latent_channels': 3},
    {'extra_downsample_stages': -1},
    {'extra_downsample_stages': 9},
    {'features': 0},
    {'input_shape': (3, 210)},
])
def test_config_validation(kwargs):
    with pytest.raises(Error):
        CodecConfig(**kwargs)


def test_encode_decode_shapes(codec, toy_images):
    latent = encode(codec, toy_images[0])

    assert isinstance(latent, Latent)
    assert latent.shape == (2, 52, 37)
    assert latent.element_count == 3848
    assert latent.model_id == codec.model_id
    assert latent.data.dtype == np.float32

    image = decode(codec, latent)

    assert image.shape == (3, 210, 150)
    assert np.all(image > -1.0)
    assert np.all(image < 1.0)


def test_encode_is_deterministic(codec, toy_images):
    assert encode(codec, toy_images[1]) == encode(codec, toy_images[1])
    assert encode(codec, toy_images[1]) != encode(codec, toy_images[2])


def test_encode_rejects_bad_input(codec):
    with pytest.raises(ShapeError):
        encode(codec, np.zeros((3, 200, 150), dtype=np.float32))

    with pytest.raises(EncodeError):
        encode(codec, np.full((3, 210, 150), 2.0, dtype=np.float32))

    image = np.zeros((3, 210, 150), dtype=np.float32)
    image[0, 0, 0] = np.nan

    with pytest.raises(EncodeError):
        encode(codec, image)


def test_decode_rejects_wrong_latent_shape(codec):
    with pytest.raises(ShapeError):
        decode(codec, Latent(np.zeros((4, 52, 37)), codec.model_id))


def test_latent_requires_three_dimensions():
    with pytest.raises(ShapeError):
        Latent(np.zeros((52, 37)), 0)


def test_model_id_tracks_decoder_only(codec, foreign_codec):
    assert codec.model_id != foreign_codec.model_id
    assert 0 <= codec.model_id < 2 ** 64

    swapped = foreign_codec.with_decoder_of(codec)

    assert swapped.model_id == codec.model_id
    np.testing.assert_array_equal(
        swapped.encoder.state_arrays()[0], foreign_codec.encoder.state_arrays()[0])


def test_with_decoder_of_requires_same_config(codec):
    with pytest.raises(Error):
        codec.with_decoder_of(CodecModel(CodecConfig(latent_channels=4), seed=0))


def test_same_seed_same_model():
    config = CodecConfig(latent_channels=1, residual_blocks=1, features=4)
    assert CodecModel(config, seed=3).model_id == CodecModel(config, seed=3).model_id


def test_extra_stages_round_trip_extents():
    config = CodecConfig(latent_channels=1, extra_downsample_stages=2, residual_blocks=1, features=4)
    model = CodecModel(config, seed=0)
    latent = encode(model, np.zeros((3, 210, 150), dtype=np.float32))

    assert latent.shape == (1, 13, 9)
    assert decode(model, latent).shape == (3, 210, 150)


def test_identical_shapes_are_full_size():
    assert compression_ratio((3, 210, 150), (3, 210, 150)) == pytest.approx(100.0)


def test_zero_latent_decodes_to_valid_image(codec):
    image = decode(codec, Latent(np.zeros(codec.latent_shape), codec.model_id))
    assert image.shape == (3, 210, 150)
    assert np.all(np.abs(image) <= 1.0)


def test_one_pixel_changes_the_latent(codec, toy_images):
    image = toy_images[3].copy()
    changed = image.copy()
    changed[1, 100, 70] = -changed[1, 100, 70] * 0.5 + 0.25
    assert encode(codec, image) != encode(codec, changed)
