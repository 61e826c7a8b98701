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

from .core import FLOAT
from .core import Node
from .core import Tensor
from .core import as_tensor
from .core import computation_record
from .core import is_grad_enabled
from .core import matmul
from .core import no_grad
from .core import topological_order
from .ops import activation
from .ops import avg_pool2
from .ops import bce_with_logits
from .ops import conv2d
from .ops import conv2d_transpose
from .ops import crop_and_resize
from .ops import cross_entropy
from .ops import dropout
from .ops import leaky_relu
from .ops import log_softmax
from .ops import pad_edge
from .ops import sigmoid
from .ops import smooth_l1
from .ops import tanh
from .optim import Adam
from .optim import AdamState
from .optim import adam_step
from .gradcheck import check_gradients
