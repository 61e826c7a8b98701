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
Convolutional image codec.

The encoder runs at the edge and turns a normalized ``3×210×150`` image
into a small latent tensor; the decoder runs in the cloud and turns the
latent back into an image. The two halves share a :class:`CodecConfig`
which fixes the latent shape and therefore the compression ratio.
"""

import logging
from collections import namedtuple

import numpy as np

from .errors import Error
from .errors import EncodeError
from .errors import ShapeError
from .utils import content_hash
from .utils import format_shape
from .high_precision_timer import function_timer
from .tensor import no_grad
from .tensor import Tensor
from .tensor import ops
from .tensor.layers import Conv2d
from .tensor.layers import ConvTranspose2d
from .tensor.layers import Module
from .tensor.layers import ResidualBlock
from .tensor.layers import he_gain

LOGGER = logging.getLogger(__name__)

INPUT_SHAPE = (3, 210, 150)
LATENT_CHANNELS = (1, 2, 4, 8, 16)
SLOPE = 0.2

# kernel, stride, padding of every down/up sampling stage
_STAGE = (4, 2, 1)

# run-time weight gains; residual blocks stay unscaled and start near identity
_HIDDEN_GAIN = he_gain(SLOPE)
_OUTPUT_GAIN = 1.0


class CodecConfig(namedtuple(
    'CodecConfig',
    ['input_shape', 'latent_channels', 'extra_downsample_stages', 'residual_blocks', 'features']
)):
    """
    Shape configuration of a codec.

    :param input_shape: ``(C, H, W)`` of the images, ``(3, 210, 150)``
    :param latent_channels: latent channel count, one of 1, 2, 4, 8 or 16
    :param extra_downsample_stages: stride-2 stages after the first two
    :param residual_blocks: residual blocks on each side
    :param features: hidden channel width
    """

    __slots__ = ()

    def __new__(cls,
                input_shape=INPUT_SHAPE,
                latent_channels=16,
                extra_downsample_stages=0,
                residual_blocks=3,
                features=8):
        self = super(CodecConfig, cls).__new__(
            cls,
            tuple(int(v) for v in input_shape),
            int(latent_channels),
            int(extra_downsample_stages),
            int(residual_blocks),
            int(features)
        )
        self.validate()
        return self

    def validate(self):
        if len(self.input_shape) != 3 or min(self.input_shape) < 1:
            raise Error(
                'Expected a positive (C, H, W) input shape, but got {}.'.format(
                    self.input_shape))

        if self.latent_channels not in LATENT_CHANNELS:
            raise Error(
                'Expected latent_channels in {}, but got {}.'.format(
                    LATENT_CHANNELS, self.latent_channels))

        if self.extra_downsample_stages < 0:
            raise Error(
                'Expected extra_downsample_stages >= 0, but got {}.'.format(
                    self.extra_downsample_stages))

        if self.residual_blocks < 0 or self.features < 1:
            raise Error(
                'Expected residual_blocks >= 0 and features >= 1, but got {} and {}.'.format(
                    self.residual_blocks, self.features))

        chain = spatial_chain(self)
        height, width = chain[-1]

        if height < 1 or width < 1:
            raise Error(
                'Input {} cannot take {} extra downsampling stages.'.format(
                    format_shape(self.input_shape), self.extra_downsample_stages))

    @property
    def latent_shape(self):
        height, width = spatial_chain(self)[-1]
        return self.latent_channels, height, width

    @property
    def compression_ratio(self):
        return compression_ratio(self.input_shape, self.latent_shape)

    def to_dict(self):
        return {
            'input_shape': list(self.input_shape),
            'latent_channels': self.latent_channels,
            'extra_downsample_stages': self.extra_downsample_stages,
            'residual_blocks': self.residual_blocks,
            'features': self.features,
        }


def spatial_chain(config):
    """Spatial extents after each downsampling stage, starting with the input."""
    kernel, stride, padding = _STAGE
    height, width = config.input_shape[1:]
    chain = [(height, width)]

    for _ in range(2 + config.extra_downsample_stages):
        height = ops.output_extent(height, kernel, stride, padding)
        width = ops.output_extent(width, kernel, stride, padding)
        chain.append((height, width))

        if height < 1 or width < 1:
            break

    return chain


def compression_ratio(input_shape, latent_shape):
    """Latent element count over input element count, in percent."""
    if min(input_shape) < 1 or min(latent_shape) < 1:
        raise ShapeError(
            'Expected positive extents, but got {} and {}.'.format(
                format_shape(input_shape), format_shape(latent_shape)))

    return 100.0 * float(np.prod(latent_shape)) / float(np.prod(input_shape))


RatioEntry = namedtuple(
    'RatioEntry',
    [
        'latent_channels', 'extra_downsample_stages', 'latent_shape',
        'input_elements', 'latent_elements', 'ratio', 'bytes_f32', 'bytes_f64',
        'printed_elements'
    ]
)

# commonly quoted element counts; the values for 4 and 2 channels are off from the computed 7696 and 3848
PRINTED_ELEMENTS = {16: 30784, 8: 15392, 4: 7296, 2: 3648}

RATIO_GRID = (
    (16, 0), (8, 0), (4, 0), (2, 0), (1, 0),
    (2, 1), (1, 1), (1, 2),
    (4, 3), (2, 3), (1, 3),
)


def ratio_grid(input_shape=INPUT_SHAPE, settings=RATIO_GRID):
    """
    Standard compression settings with their exact ratios.

    Element counts are computed, not copied; entries at the base 52×37
    latent also carry the commonly quoted count from PRINTED_ELEMENTS.
    """
    entries = []

    for channels, extra in settings:
        config = CodecConfig(input_shape, channels, extra)
        latent_shape = config.latent_shape
        elements = int(np.prod(latent_shape))
        printed = PRINTED_ELEMENTS.get(channels) if extra == 0 else None

        entries.append(RatioEntry(
            channels,
            extra,
            latent_shape,
            int(np.prod(input_shape)),
            elements,
            round(config.compression_ratio, 2),
            elements * 4,
            elements * 8,
            printed
        ))

    return entries


class Latent(object):
    """
    An encoded image.

    :param data: ``C×H×W`` float32 array
    :param model_id: content hash of the decoder the encoder was paired with
    """

    def __init__(self, data, model_id):
        self._data = np.ascontiguousarray(data, dtype=np.float32)
        self._model_id = int(model_id)

        if self._data.ndim != 3:
            raise ShapeError(
                'Expected a C×H×W latent, but got shape {}.'.format(
                    format_shape(self._data.shape)))

    @property
    def data(self):
        return self._data

    @property
    def shape(self):
        return self._data.shape

    @property
    def model_id(self):
        return self._model_id

    @property
    def element_count(self):
        return self._data.size

    def __eq__(self, other):
        return (
            isinstance(other, Latent)
            and self._model_id == other._model_id
            and self._data.shape == other._data.shape
            and self._data.tobytes() == other._data.tobytes()
        )

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'Latent(shape={}, model_id=0x{:016x})'.format(self.shape, self._model_id)


def _split_groups(count, groups=3):
    return [count // groups + (1 if i < count % groups else 0) for i in range(groups)]


class Encoder(Module):

    def __init__(self, config, rng):
        Module.__init__(self)
        kernel, stride, padding = _STAGE
        channels = config.input_shape[0]
        features = config.features
        self.downs = []

        for index in range(2 + config.extra_downsample_stages):
            conv = Conv2d(
                channels if index == 0 else features, features, kernel, stride, padding,
                rng=rng, gain=_HIDDEN_GAIN)
            self.downs.append(self.register_module('down{}'.format(index), conv))

        self.blocks = [
            self.register_module('res{}'.format(index), ResidualBlock(features, rng=rng, slope=SLOPE))
            for index in range(config.residual_blocks)
        ]
        self.out = self.register_module(
            'out', Conv2d(features, config.latent_channels, 3, 1, 1, rng=rng, gain=_OUTPUT_GAIN))

    def forward(self, x):
        for conv in self.downs:
            x = ops.leaky_relu(conv(x), SLOPE)

        for block in self.blocks:
            x = block(x)

        return self.out(x)


class Decoder(Module):
    """
    Mirror of :class:`Encoder`.

    Extra upsampling stages come first, then residual groups crossed
    with the two main upsampling stages. Every transposed convolution is
    followed by edge replication up to the encoder's recorded extents.
    """

    def __init__(self, config, rng):
        Module.__init__(self)
        kernel, stride, padding = _STAGE
        features = config.features
        chain = spatial_chain(config)
        # extents to restore, coarsest stage first
        self.targets = list(reversed(chain[:-1]))
        self.inp = self.register_module(
            'inp', Conv2d(config.latent_channels, features, 3, 1, 1, rng=rng, gain=_HIDDEN_GAIN))
        self.ups = []

        for index in range(2 + config.extra_downsample_stages):
            conv = ConvTranspose2d(
                features, features, kernel, stride, padding, rng=rng, gain=_HIDDEN_GAIN)
            self.ups.append(self.register_module('up{}'.format(index), conv))

        self.groups = []
        block_index = 0

        for size in _split_groups(config.residual_blocks):
            group = []

            for _ in range(size):
                block = ResidualBlock(features, rng=rng, slope=SLOPE)
                group.append(self.register_module('res{}'.format(block_index), block))
                block_index += 1

            self.groups.append(group)

        self.out = self.register_module(
            'out', Conv2d(features, config.input_shape[0], 3, 1, 1, rng=rng, gain=_OUTPUT_GAIN))

    def _upsample(self, index, x):
        height, width = self.targets[index]
        return ops.leaky_relu(ops.pad_edge(self.ups[index](x), height, width), SLOPE)

    def forward(self, z):
        x = ops.leaky_relu(self.inp(z), SLOPE)
        extra = len(self.ups) - 2

        for index in range(extra):
            x = self._upsample(index, x)

        for block in self.groups[0]:
            x = block(x)

        x = self._upsample(extra, x)

        for block in self.groups[1]:
            x = block(x)

        x = self._upsample(extra + 1, x)

        for block in self.groups[2]:
            x = block(x)

        return ops.tanh(self.out(x))


class CodecModel(object):
    """
    Paired encoder and decoder.

    :param config: :class:`CodecConfig`, defaults to the 32.58% setting
    :param seed: seed for the weight initialization
    """

    def __init__(self, config=None, seed=None):
        self._config = config if config is not None else CodecConfig()
        rng = np.random.default_rng(seed)
        self._encoder = Encoder(self._config, rng)
        self._decoder = Decoder(self._config, rng)

    @property
    def config(self):
        return self._config

    @property
    def encoder(self):
        return self._encoder

    @property
    def decoder(self):
        return self._decoder

    @property
    def latent_shape(self):
        return self._config.latent_shape

    @property
    def compression_ratio(self):
        return self._config.compression_ratio

    @property
    def model_id(self):
        """64-bit content hash of the decoder parameters."""
        return content_hash(self._decoder.state_arrays())

    def parameters(self):
        return self._encoder.parameters() + self._decoder.parameters()

    def parameter_arrays(self):
        return self._encoder.state_arrays() + self._decoder.state_arrays()

    def load_parameter_arrays(self, arrays):
        count = len(self._encoder.parameters())
        self._encoder.load_arrays(arrays[:count])
        self._decoder.load_arrays(arrays[count:])

    def with_decoder_of(self, other):
        """A new model with this encoder and a copy of `other`'s decoder."""
        if other.config != self._config:
            raise Error('Expected matching codec configurations.')

        model = CodecModel(self._config)
        model._encoder.load_arrays(self._encoder.state_arrays())
        model._decoder.load_arrays(other.decoder.state_arrays())
        return model

    def encode(self, image):
        return encode(self, image)

    def decode(self, latent):
        return decode(self, latent)

    def __repr__(self):
        return 'CodecModel(config={}, model_id=0x{:016x})'.format(self._config, self.model_id)


@function_timer
def encode(model, image):
    """Encode one normalized ``3×210×150`` image into a :class:`Latent`."""
    image = np.asarray(image.data if isinstance(image, Tensor) else image, dtype=np.float32)

    if image.shape != model.config.input_shape:
        raise ShapeError(
            'Expected an image of shape {}, but got {}.'.format(
                format_shape(model.config.input_shape), format_shape(image.shape)))

    if not np.all(np.isfinite(image)) or image.min() < -1.0 or image.max() > 1.0:
        raise EncodeError('Expected pixel values in [-1, 1].')

    with no_grad():
        latent = model.encoder(Tensor(image))

    return Latent(latent.data, model.model_id)


@function_timer
def decode(model, latent):
    """
    Reconstruct an image from `latent`.

    The latent's model_id is not checked here; decoding with a foreign
    decoder is allowed and simply produces a poor image.
    """
    data = latent.data if isinstance(latent, (Latent, Tensor)) else np.asarray(latent, dtype=np.float32)

    if tuple(data.shape) != model.latent_shape:
        raise ShapeError(
            'Expected a latent of shape {}, but got {}.'.format(
                format_shape(model.latent_shape), format_shape(data.shape)))

    with no_grad():
        image = model.decoder(Tensor(data))

    return image.data
