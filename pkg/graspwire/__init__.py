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

from .errors import Error
from .errors import ShapeError
from .errors import ParseError
from .errors import EncodeError
from .errors import DecodeError
from .errors import CheckpointError
from .errors import TransportError
from .codec import CodecConfig
from .codec import CodecModel
from .codec import Latent
from .codec import encode
from .codec import decode
from .codec import ratio_grid
from .checkpoint import save_checkpoint
from .checkpoint import load_checkpoint
from .metrics import psnr
from .metrics import ssim
from .metrics import ms_ssim
from .trainer import TrainConfig
from .trainer import train

__version__ = '0.1.0b'
