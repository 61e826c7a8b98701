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
Two-stage grasp detector.

Stage one scores anchors on a coarse backbone feature map for
graspability and regresses proposal boxes. Stage two crops the features
under each surviving proposal and classifies it into the no-grasp bin or
one of 20 orientation bins, refining the box per bin.
"""

import logging
from collections import namedtuple

import numpy as np

from ..errors import Error
from ..errors import ShapeError
from ..errors import CheckpointMismatchError
from ..utils import content_hash
from ..utils import create_little_endian_formats
from ..utils import format_shape
from ..high_precision_timer import function_timer
from ..tensor import Adam
from ..tensor import Tensor
from ..tensor import no_grad
from ..tensor import ops
from ..tensor.layers import Conv2d
from ..tensor.layers import Linear
from ..tensor.layers import Module
from .. import checkpoint
from . import anchors as anchor_ops
from .losses import gcr_loss
from .losses import gpn_loss
from .losses import total_loss
from .rect import BIN_COUNT
from .rect import NO_GRASP
from .rect import GraspCandidate
from .rect import GraspRect
from .rect import angle_to_bin
from .rect import bin_to_angle

LOGGER = logging.getLogger(__name__)

SLOPE = 0.2
CLASSES = BIN_COUNT + 1


class DetectorConfig(namedtuple(
    'DetectorConfig',
    [
        'input_shape', 'features', 'anchor_scales', 'anchor_ratios', 'nms_threshold',
        'top_n', 'proposal_threshold', 'crop_size', 'hidden', 'lam', 'lam2', 'smooth_beta'
    ]
)):
    """
    :param features: channel widths of the four stride-2 backbone stages
    :param anchor_scales: anchor side lengths in pixels (three)
    :param anchor_ratios: anchor width/height ratios (three)
    :param nms_threshold: proposal suppression IoU
    :param top_n: proposals kept after suppression
    :param proposal_threshold: minimum graspability of a proposal
    :param crop_size: side of the bilinear feature crop
    :param hidden: width of the configuration head
    :param lam: proposal regression weight
    :param lam2: configuration regression weight
    :param smooth_beta: smooth-L1 transition point, 0 for plain L1
    """

    __slots__ = ()

    def __new__(cls, input_shape=(3, 210, 150), features=(8, 16, 32, 32),
                anchor_scales=(24.0, 40.0, 64.0), anchor_ratios=(0.5, 1.0, 2.0),
                nms_threshold=0.5, top_n=32, proposal_threshold=0.5, crop_size=7,
                hidden=64, lam=1.0, lam2=1.0, smooth_beta=1.0):
        self = super(DetectorConfig, cls).__new__(
            cls,
            tuple(int(v) for v in input_shape),
            tuple(int(v) for v in features),
            tuple(float(v) for v in anchor_scales),
            tuple(float(v) for v in anchor_ratios),
            float(nms_threshold), int(top_n), float(proposal_threshold), int(crop_size),
            int(hidden), float(lam), float(lam2), float(smooth_beta))

        if len(self.features) != 4 or min(self.features) < 1:
            raise Error('Expected four positive backbone widths, but got {}.'.format(self.features))

        if len(self.anchor_scales) != 3 or len(self.anchor_ratios) != 3:
            raise Error('Expected three anchor scales and three ratios.')

        if min(self.anchor_scales) <= 0 or min(self.anchor_ratios) <= 0:
            raise Error('Expected positive anchor scales and ratios.')

        if self.top_n < 1 or self.crop_size < 1 or self.hidden < 1:
            raise Error('Expected positive top_n, crop_size and hidden.')

        if self.smooth_beta < 0:
            raise Error('Expected smooth_beta >= 0, but got {}.'.format(self.smooth_beta))

        return self

    @property
    def anchors_per_cell(self):
        return len(self.anchor_scales) * len(self.anchor_ratios)

    @property
    def feature_shape(self):
        height, width = self.input_shape[1:]

        for _ in self.features:
            height = ops.output_extent(height, 4, 2, 1)
            width = ops.output_extent(width, 4, 2, 1)

        return height, width


class DetectorModel(Module):
    """
    Backbone, proposal head and configuration head.

    :param config: :class:`DetectorConfig`
    :param seed: seed for the weight initialization
    """

    def __init__(self, config=None, seed=None):
        Module.__init__(self)
        self._config = config or DetectorConfig()
        rng = np.random.default_rng(seed)
        c = self._config
        widths = (c.input_shape[0],) + c.features
        self.backbone = [
            self.register_module('stage{}'.format(i), Conv2d(widths[i], widths[i + 1], 4, 2, 1, rng=rng))
            for i in range(len(c.features))
        ]
        channels = c.features[-1]
        per_cell = c.anchors_per_cell
        self.proposal_conv = self.register_module(
            'proposal_conv', Conv2d(channels, channels, 3, 1, 1, rng=rng))
        self.proposal_scores = self.register_module(
            'proposal_scores', Conv2d(channels, per_cell * 2, 1, rng=rng))
        self.proposal_deltas = self.register_module(
            'proposal_deltas', Conv2d(channels, per_cell * 4, 1, rng=rng))
        self.config_hidden = self.register_module(
            'config_hidden', Linear(channels * c.crop_size * c.crop_size, c.hidden, rng=rng))
        self.config_bins = self.register_module('config_bins', Linear(c.hidden, CLASSES, rng=rng))
        self.config_boxes = self.register_module('config_boxes', Linear(c.hidden, CLASSES * 4, rng=rng))

        self._anchors = anchor_ops.generate_anchors(
            c.feature_shape, c.input_shape[1:], c.anchor_scales, c.anchor_ratios)

    @property
    def config(self):
        return self._config

    @property
    def anchors(self):
        return self._anchors

    @property
    def model_id(self):
        return content_hash(self.state_arrays())

    def features(self, image):
        x = image

        for stage in self.backbone:
            x = ops.leaky_relu(stage(x), SLOPE)

        return x

    def propose(self, features):
        """Per-anchor ``A×2`` scores and ``A×4`` deltas, cell-major."""
        h = ops.leaky_relu(self.proposal_conv(features), SLOPE)
        scores = self.proposal_scores(h).transpose(1, 2, 0).reshape(-1, 2)
        deltas = self.proposal_deltas(h).transpose(1, 2, 0).reshape(-1, 4)
        return scores, deltas

    def configure(self, features, boxes):
        """21-bin logits (``K×21``) and per-bin refinements (``K×21×4``) for `boxes`."""
        c = self._config
        rows, cols = features.shape[1:]
        scale = np.array(
            [cols / float(c.input_shape[2]), rows / float(c.input_shape[1])] * 2)
        crops = ops.crop_and_resize(features, np.asarray(boxes) * scale, c.crop_size)
        flat = crops.reshape(crops.shape[0], features.shape[0] * c.crop_size * c.crop_size)
        hidden = ops.leaky_relu(self.config_hidden(flat), SLOPE)
        logits = self.config_bins(hidden)
        refinements = self.config_boxes(hidden).reshape(-1, CLASSES, 4)
        return logits, refinements

    def forward(self, image):
        return detect(self, image)


def _check_image(model, image):
    image = np.asarray(image.data if isinstance(image, Tensor) else image, dtype=np.float32)

    if image.shape != model.config.input_shape:
        raise ShapeError(
            'Expected an image of shape {}, but got {}.'.format(
                format_shape(model.config.input_shape), format_shape(image.shape)))

    return image


def select_proposals(model, scores, deltas):
    """
    Boxes and anchor indices of the proposals kept after thresholding,
    suppression and the top-N cut, best first.
    """
    c = model.config
    probs = ops.softmax(scores, axis=1)[:, 1]
    boxes = anchor_ops.clip_boxes(anchor_ops.decode_boxes(model.anchors, deltas), c.input_shape[1:])
    sizes = np.minimum(boxes[:, 2] - boxes[:, 0], boxes[:, 3] - boxes[:, 1])
    candidates = np.flatnonzero((probs >= c.proposal_threshold) & (sizes >= 1.0))

    if not candidates.size:
        return np.zeros((0, 4)), np.zeros(0, dtype=np.int64), np.zeros(0)

    keep = anchor_ops.nms(boxes[candidates], probs[candidates], c.nms_threshold)[:c.top_n]
    chosen = candidates[keep]
    return boxes[chosen], chosen, probs[chosen]


def refine_rect(box, delta, bin_index):
    """Grasp rectangle from a proposal box, its refinement and an orientation bin."""
    x1, y1, x2, y2 = box
    pw = max(x2 - x1, 1e-3)
    ph = max(y2 - y1, 1e-3)
    cx = x1 + 0.5 * pw + float(delta[0]) * pw
    cy = y1 + 0.5 * ph + float(delta[1]) * ph
    w = pw * float(np.exp(min(float(delta[2]), anchor_ops.MAX_LOG_DELTA)))
    h = ph * float(np.exp(min(float(delta[3]), anchor_ops.MAX_LOG_DELTA)))
    return GraspRect(cx, cy, w, h, bin_to_angle(bin_index))


def rect_targets(box, rect):
    """Refinement targets taking proposal `box` onto grasp `rect`."""
    x1, y1, x2, y2 = box
    pw = max(x2 - x1, 1e-3)
    ph = max(y2 - y1, 1e-3)
    return np.array([
        (rect.x - (x1 + 0.5 * pw)) / pw,
        (rect.y - (y1 + 0.5 * ph)) / ph,
        np.log(rect.w / pw),
        np.log(rect.h / ph),
    ])


@function_timer
def detect(model, image):
    """
    Grasp candidates for one normalized ``3×210×150`` image.

    A proposal yields a candidate only when its best orientation bin is
    more confident than the no-grasp bin. Candidates are ordered by
    descending confidence, ties by lower anchor index.
    """
    image = _check_image(model, image)

    with no_grad():
        features = model.features(Tensor(image))
        scores, deltas = model.propose(features)
        boxes, anchor_index, _ = select_proposals(model, scores.data, deltas.data)

        if not boxes.shape[0]:
            return []

        logits, refinements = model.configure(features, boxes)

    probs = ops.softmax(logits.data, axis=1)
    candidates = []

    for k in range(boxes.shape[0]):
        best = 1 + int(np.argmax(probs[k, 1:]))

        if not probs[k, best] > probs[k, NO_GRASP]:
            continue

        rect = refine_rect(boxes[k], refinements.data[k, best], best)
        candidates.append(GraspCandidate(rect, best, probs[k, best], anchor_index[k]))

    candidates.sort(key=lambda cand: (-cand.confidence, cand.anchor_index))
    return candidates


DetectorTrainConfig = namedtuple(
    'DetectorTrainConfig',
    ['steps', 'learning_rate', 'seed', 'anchor_batch', 'negative_boxes', 'jitter', 'log_every']
)
DetectorTrainConfig.__new__.__defaults__ = (400, 1e-3, 0, 64, 8, 2, 50)


def sample_anchor_labels(anchor_set, batch, rng):
    """Keep at most `batch` labelled anchors, at most half of them positive."""
    labels = anchor_set.labels.copy()
    positives = anchor_set.positives
    negatives = anchor_set.negatives
    max_pos = batch // 2

    if positives.size > max_pos:
        labels[rng.choice(positives, positives.size - max_pos, replace=False)] = anchor_ops.IGNORE
        positives_kept = max_pos
    else:
        positives_kept = positives.size

    max_neg = batch - positives_kept

    if negatives.size > max_neg:
        labels[rng.choice(negatives, negatives.size - max_neg, replace=False)] = anchor_ops.IGNORE

    return anchor_set._replace(labels=labels)


def configuration_rows(boxes, truths, positive_iou=anchor_ops.POSITIVE_IOU):
    """Ground-truth bins and refinement targets for proposal `boxes`."""
    bins = np.zeros(len(boxes), dtype=np.int64)
    targets = np.zeros((len(boxes), 4))

    if not truths or not len(boxes):
        return bins, targets

    hulls = np.array([t.hull() for t in truths])
    iou = anchor_ops.box_iou(boxes, hulls)

    for k in range(len(boxes)):
        t = int(np.argmax(iou[k]))

        if iou[k, t] >= positive_iou:
            bins[k] = angle_to_bin(truths[t].theta)
            targets[k] = rect_targets(boxes[k], truths[t])

    return bins, targets


def _training_boxes(model, scene_truths, proposals, rng, config):
    boxes = [t.hull() for t in scene_truths]

    for truth in scene_truths:
        hull = truth.hull()
        size = np.array([hull[2] - hull[0], hull[3] - hull[1]] * 2)

        for _ in range(config.jitter):
            boxes.append(hull + rng.normal(0.0, 0.08, size=4) * size)

    if config.negative_boxes:
        pick = rng.choice(model.anchors.shape[0], config.negative_boxes, replace=False)
        boxes.extend(model.anchors[pick])

    boxes.extend(proposals[:config.negative_boxes])
    boxes = anchor_ops.clip_boxes(np.array(boxes, dtype=np.float64).reshape(-1, 4), model.config.input_shape[1:])
    sizes = np.minimum(boxes[:, 2] - boxes[:, 0], boxes[:, 3] - boxes[:, 1])
    return boxes[sizes >= 1.0]


def detector_loss(model, scene, rng, train_config):
    """Total training loss of one scene, with sampled anchors and configuration boxes."""
    c = model.config
    image = Tensor(_check_image(model, scene.image))
    truths = scene.truths
    features = model.features(image)
    scores, deltas = model.propose(features)
    anchor_set = sample_anchor_labels(
        anchor_ops.assign_anchor_targets(model.anchors, truths), train_config.anchor_batch, rng)
    l_gpn = gpn_loss(anchor_set, scores, deltas, c.lam, c.smooth_beta, normalize=True)

    proposals, _, _ = select_proposals(model, scores.data, deltas.data)
    boxes = _training_boxes(model, truths, proposals, rng, train_config)

    if not boxes.shape[0]:
        return l_gpn

    bins, targets = configuration_rows(boxes, truths)
    logits, refinements = model.configure(features, boxes)
    l_gcr = gcr_loss(logits, bins, refinements, targets, c.lam2, c.smooth_beta, normalize=True)
    return total_loss(l_gpn, l_gcr)


def train_detector(scenes, config=None, train_config=None, model=None):
    """
    Fit a :class:`DetectorModel` to `scenes`, one scene per step in a
    seeded shuffled order. Returns the model and the list of
    ``(step, mean loss)`` log points.
    """
    scenes = list(scenes)

    if not scenes:
        raise Error('Expected at least one training scene.')

    train_config = train_config or DetectorTrainConfig()
    model = model or DetectorModel(config, seed=train_config.seed)
    rng = np.random.default_rng(train_config.seed + 1)
    optimizer = Adam(model.parameters(), lr=train_config.learning_rate)
    history = []
    running = []
    order = []

    for step in range(1, train_config.steps + 1):
        if not order:
            order = list(rng.permutation(len(scenes)))

        scene = scenes[order.pop()]
        loss = detector_loss(model, scene, rng, train_config)
        value = loss.item()

        if not np.isfinite(value):
            raise Error('Non-finite detector loss ({}) at step {}.'.format(value, step))

        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        running.append(value)

        if step % train_config.log_every == 0:
            history.append((step, float(np.mean(running))))
            LOGGER.info('detector step %d: loss %.5f', step, history[-1][1])
            running = []

    return model, history


_DETECTOR_CONFIG = create_little_endian_formats(
    [('channels', 'u', 32), ('height', 'u', 32), ('width', 'u', 32)]
    + [('feature{}'.format(i), 'u', 32) for i in range(4)]
    + [('scale{}'.format(i), 'f', 32) for i in range(3)]
    + [('ratio{}'.format(i), 'f', 32) for i in range(3)]
    + [
        ('nms_threshold', 'f', 32), ('top_n', 'u', 32), ('proposal_threshold', 'f', 32),
        ('crop_size', 'u', 32), ('hidden', 'u', 32), ('lam', 'f', 32), ('lam2', 'f', 32),
        ('smooth_beta', 'f', 32),
    ]
)


def save_detector(model, path):
    c = model.config
    values = {
        'channels': c.input_shape[0], 'height': c.input_shape[1], 'width': c.input_shape[2],
        'nms_threshold': c.nms_threshold, 'top_n': c.top_n,
        'proposal_threshold': c.proposal_threshold, 'crop_size': c.crop_size,
        'hidden': c.hidden, 'lam': c.lam, 'lam2': c.lam2, 'smooth_beta': c.smooth_beta,
    }

    for i in range(4):
        values['feature{}'.format(i)] = c.features[i]

    for i in range(3):
        values['scale{}'.format(i)] = c.anchor_scales[i]
        values['ratio{}'.format(i)] = c.anchor_ratios[i]

    checkpoint.write_parameter_file(
        path, checkpoint.DETECTOR_MAGIC, _DETECTOR_CONFIG, values, model.state_arrays(), model.model_id)


def _f32(value):
    return float(np.float32(value))


def load_detector(path):
    values, flat, digest = checkpoint.read_parameter_file(
        path, checkpoint.DETECTOR_MAGIC, _DETECTOR_CONFIG)

    try:
        config = DetectorConfig(
            (values['channels'], values['height'], values['width']),
            [values['feature{}'.format(i)] for i in range(4)],
            [_f32(values['scale{}'.format(i)]) for i in range(3)],
            [_f32(values['ratio{}'.format(i)]) for i in range(3)],
            _f32(values['nms_threshold']), values['top_n'], _f32(values['proposal_threshold']),
            values['crop_size'], values['hidden'], _f32(values['lam']), _f32(values['lam2']),
            _f32(values['smooth_beta']))
    except Exception as e:
        raise CheckpointMismatchError('Invalid stored configuration: {}'.format(e))

    model = DetectorModel(config)
    shapes = [p.shape for p in model.parameters()]
    expected = int(sum(np.prod(s) for s in shapes))

    if flat.size != expected:
        raise CheckpointMismatchError(
            'Expected {} parameters, but got {}.'.format(expected, flat.size))

    model.load_arrays(checkpoint.split_values(flat, shapes))

    if model.model_id != digest:
        raise CheckpointMismatchError(
            'Expected detector hash 0x{:016x}, but got 0x{:016x}.'.format(digest, model.model_id))

    LOGGER.info('Loaded detector 0x%016x from %s.', digest, path)
    return model
