
import math

import numpy as np
import pytest

from graspwire.errors import ShapeError
from graspwire.grasp.anchors import AnchorSet
from graspwire.grasp.losses import gcr_loss
from graspwire.grasp.losses import gpn_loss
from graspwire.grasp.losses import total_loss
from graspwire.tensor import Tensor


def cross_entropy(row, label):
    row = np.asarray(row, dtype=np.float64)
    return math.log(np.exp(row).sum()) - row[label]


def smooth_l1(d, beta=1.0):
    d = abs(d)
    return 0.5 * d * d / beta if d < beta else d - 0.5 * beta


def anchor_set(labels, targets):
    labels = np.asarray(labels, dtype=np.int64)
    return AnchorSet(
        np.zeros((labels.size, 4)), labels, np.asarray(targets, dtype=np.float64),
        np.where(labels == 1, 0, -1))


def test_gpn_regression_is_gated_by_positives():
    rng = np.random.default_rng(0)
    anchors = anchor_set([0, 0, -1, 0], np.zeros((4, 4)))
    scores = rng.normal(size=(4, 2))
    deltas = rng.normal(size=(4, 4))

    base = gpn_loss(anchors, scores, deltas).item()
    perturbed = gpn_loss(anchors, scores, deltas * 1000.0).item()
    expected = sum(cross_entropy(scores[i], 0) for i in (0, 1, 3))

    assert base == perturbed
    assert base == pytest.approx(expected, rel=1e-5)


def test_gpn_perfect_predictions():
    targets = np.array([[0.1, -0.2, 0.3, 0.0], [0, 0, 0, 0], [0, 0, 0, 0]])
    anchors = anchor_set([1, 0, 0], targets)
    scores = np.array([[-40.0, 40.0], [40.0, -40.0], [40.0, -40.0]])

    assert gpn_loss(anchors, scores, targets).item() == pytest.approx(0.0, abs=1e-6)


def test_gpn_three_anchor_hand_case():
    targets = np.array([[0.5, -1.5, 0.0, 2.0], [0, 0, 0, 0], [0, 0, 0, 0]])
    anchors = anchor_set([1, 0, -1], targets)
    scores = np.array([[0.2, 1.0], [1.5, -0.5], [3.0, 3.0]])
    deltas = np.array([[0.0, 0.0, 0.5, 0.0], [9.0, 9.0, 9.0, 9.0], [9.0, 9.0, 9.0, 9.0]])

    classification = cross_entropy(scores[0], 1) + cross_entropy(scores[1], 0)
    regression = smooth_l1(-0.5) + smooth_l1(1.5) + smooth_l1(0.5) + smooth_l1(-2.0)

    loss = gpn_loss(anchors, scores, deltas, lam=2.0)
    assert loss.item() == pytest.approx(classification + 2.0 * regression, rel=1e-5)

    normalized = gpn_loss(anchors, scores, deltas, lam=2.0, normalize=True)
    assert normalized.item() == pytest.approx(classification / 2 + 2.0 * regression, rel=1e-5)

    plain = gpn_loss(anchors, scores, deltas, beta=0.0)
    assert plain.item() == pytest.approx(classification + 0.5 + 1.5 + 0.5 + 2.0, rel=1e-5)


def test_gpn_gradients_reach_positive_deltas_only():
    anchors = anchor_set([1, 0, -1], np.ones((3, 4)))
    deltas = Tensor(np.zeros((3, 4)), requires_grad=True)
    gpn_loss(anchors, np.zeros((3, 2)), deltas).backward()

    assert np.all(deltas.grad[0] != 0)
    assert np.all(deltas.grad[1:] == 0)


def test_gpn_shape_errors():
    anchors = anchor_set([1, 0], np.zeros((2, 4)))

    with pytest.raises(ShapeError):
        gpn_loss(anchors, np.zeros((3, 2)), np.zeros((2, 4)))

    with pytest.raises(ShapeError):
        gpn_loss(anchors, np.zeros((2, 2)), np.zeros((2, 5)))


def test_gcr_no_grasp_rows_skip_regression():
    rng = np.random.default_rng(1)
    logits = rng.normal(size=(3, 21))
    deltas = rng.normal(size=(3, 21, 4))
    targets = rng.normal(size=(3, 4))
    bins = [0, 0, 0]

    base = gcr_loss(logits, bins, deltas, targets).item()

    assert base == gcr_loss(logits, bins, deltas * 1000.0, targets).item()
    assert base == pytest.approx(sum(cross_entropy(logits[i], 0) for i in range(3)), rel=1e-5)


def test_gcr_perfect_predictions():
    logits = np.full((2, 21), -30.0)
    logits[0, 4] = 30.0
    logits[1, 0] = 30.0
    targets = np.array([[0.1, 0.2, -0.3, 0.4], [0.0, 0.0, 0.0, 0.0]])
    deltas = np.zeros((2, 21, 4))
    deltas[0, 4] = targets[0]

    assert gcr_loss(logits, [4, 0], deltas, targets).item() == pytest.approx(0.0, abs=1e-6)


def test_gcr_two_candidate_hand_case():
    logits = np.zeros((2, 21))
    logits[0, 3] = 2.0
    logits[1, 0] = 1.0
    deltas = np.zeros((2, 21, 4))
    deltas[0, 3] = [0.5, 0.0, -2.0, 0.25]
    deltas[0, 5] = [100.0, 100.0, 100.0, 100.0]
    deltas[1, 0] = [100.0, 100.0, 100.0, 100.0]
    targets = np.array([[0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0]])

    classification = cross_entropy(logits[0], 3) + cross_entropy(logits[1], 0)
    regression = smooth_l1(0.5) + smooth_l1(-2.0) + smooth_l1(0.25)

    loss = gcr_loss(logits, [3, 0], deltas, targets, lam2=0.5)
    assert loss.item() == pytest.approx(classification + 0.5 * regression, rel=1e-5)

    flat = gcr_loss(logits, [3, 0], deltas[:, 3], targets, lam2=0.5)
    assert flat.item() == pytest.approx(loss.item(), rel=1e-6)


def test_gcr_empty_and_shape_errors():
    assert gcr_loss(np.zeros((0, 21)), [], np.zeros((0, 21, 4)), np.zeros((0, 4))).item() == 0.0

    with pytest.raises(ShapeError):
        gcr_loss(np.zeros((2, 21)), [1], np.zeros((2, 21, 4)), np.zeros((2, 4)))

    with pytest.raises(ShapeError):
        gcr_loss(np.zeros((2, 21)), [1, 2], np.zeros((2, 20, 4)), np.zeros((2, 4)))


def test_total_loss():
    assert total_loss(Tensor(0.0), Tensor(0.0)).item() == 0.0
    assert total_loss(Tensor(1.5), Tensor(0.0)).item() == 1.5
    assert total_loss(Tensor(0.25), Tensor(2.0)).item() == pytest.approx(2.25)


def test_gpn_regression_gating_over_random_instances():
    rng = np.random.default_rng(5)

    for _ in range(1000):
        count = int(rng.integers(1, 9))
        labels = rng.integers(-1, 2, size=count)
        anchors = anchor_set(labels, rng.normal(size=(count, 4)))
        scores = rng.normal(size=(count, 2))
        deltas = rng.normal(size=(count, 4))
        moved = deltas.copy()
        moved[labels != 1] = rng.normal(scale=100.0, size=moved[labels != 1].shape)

        assert gpn_loss(anchors, scores, deltas).item() == gpn_loss(anchors, scores, moved).item()


def test_gcr_regression_gating_over_random_instances():
    rng = np.random.default_rng(6)

    for _ in range(1000):
        count = int(rng.integers(1, 9))
        bins = rng.integers(0, 21, size=count)
        bins[rng.random(count) < 0.5] = 0
        logits = rng.normal(size=(count, 21))
        targets = rng.normal(size=(count, 4))
        deltas = rng.normal(size=(count, 21, 4))
        moved = rng.normal(scale=100.0, size=deltas.shape)
        rows = np.flatnonzero(bins != 0)
        moved[rows, bins[rows]] = deltas[rows, bins[rows]]

        assert gcr_loss(logits, bins, deltas, targets).item() == gcr_loss(logits, bins, moved, targets).item()
