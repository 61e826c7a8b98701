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

from .rect import BIN_COUNT
from .rect import NO_GRASP
from .rect import GraspCandidate
from .rect import GraspRect
from .rect import angle_difference
from .rect import angle_to_bin
from .rect import bin_to_angle
from .rect import canonical_angle
from .rect import is_success
from .rect import rect_iou
from .annotation import Scene
from .annotation import load_dataset
from .annotation import parse_rect_annotations
from .anchors import AnchorSet
from .anchors import assign_anchor_targets
from .anchors import generate_anchors
from .anchors import nms
from .losses import gcr_loss
from .losses import gpn_loss
from .losses import total_loss
from .detector import DetectorConfig
from .detector import DetectorModel
from .detector import DetectorTrainConfig
from .detector import detect
from .detector import load_detector
from .detector import save_detector
from .detector import train_detector
from .evaluate import AccuracyReport
from .evaluate import evaluate_detector
from .evaluate import ratio_sweep
