
import numpy as np
import pytest

from graspwire.grasp import anchors as anchor_ops
from graspwire.grasp.rect import GraspRect


def rect_with_hull(box):
    x1, y1, x2, y2 = box
    return GraspRect((x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1, 0.0)


def brute_force_labels(anchors, hulls, positive_iou=0.5, negative_iou=0.3):
    def iou(a, b):
        w = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
        h = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
        inter = w * h
        union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
        return inter / union

    labels = []

    for anchor in anchors:
        best = max(iou(anchor, hull) for hull in hulls)
        labels.append(1 if best >= positive_iou else 0 if best < negative_iou else -1)

    for hull in hulls:
        scores = [iou(anchor, hull) for anchor in anchors]

        if max(scores) > 0:
            labels[scores.index(max(scores))] = 1

    return labels


def test_generate_anchors_layout():
    boxes = anchor_ops.generate_anchors((13, 9), (210, 150))

    assert boxes.shape == (1053, 4)

    first_cell = boxes[:9]
    centers = (first_cell[:, :2] + first_cell[:, 2:]) / 2
    np.testing.assert_allclose(centers, np.tile([150 / 18.0, 210 / 26.0], (9, 1)))

    areas = anchor_ops.box_area(first_cell).reshape(3, 3)
    np.testing.assert_allclose(areas, np.array([[24.0], [40.0], [64.0]]) ** 2 * np.ones((1, 3)))

    widths = first_cell[:3, 2] - first_cell[:3, 0]
    heights = first_cell[:3, 3] - first_cell[:3, 1]
    np.testing.assert_allclose(widths / heights, [0.5, 1.0, 2.0])

    # the next cell is one column to the right
    second = (boxes[9, :2] + boxes[9, 2:]) / 2
    np.testing.assert_allclose(second, [150 / 18.0 * 3, 210 / 26.0])


def test_box_iou():
    iou = anchor_ops.box_iou([[0, 0, 10, 10]], [[0, 0, 10, 10], [5, 0, 15, 10], [20, 20, 30, 30]])
    np.testing.assert_allclose(iou, [[1.0, 1.0 / 3.0, 0.0]])


def test_equal_hull_is_positive_with_zero_targets():
    anchors = anchor_ops.generate_anchors((13, 9), (210, 150))
    truth = rect_with_hull(anchors[500])
    assignment = anchor_ops.assign_anchor_targets(anchors, [truth])

    assert assignment.labels[500] == anchor_ops.POSITIVE
    assert assignment.matches[500] == 0
    np.testing.assert_allclose(assignment.targets[500], np.zeros(4), atol=1e-12)


def test_disjoint_anchor_is_negative():
    anchors = np.array([[0, 0, 10, 10], [100, 100, 120, 120]], dtype=float)
    assignment = anchor_ops.assign_anchor_targets(anchors, [rect_with_hull([101, 101, 119, 119])])

    assert assignment.labels.tolist() == [0, 1]
    np.testing.assert_array_equal(assignment.negatives, [0])
    np.testing.assert_array_equal(assignment.positives, [1])
    np.testing.assert_array_equal(assignment.targets[0], np.zeros(4))
    assert assignment.matches[0] == -1


def test_no_truths_means_all_negative():
    anchors = anchor_ops.generate_anchors((2, 2), (20, 20), scales=(4.0, 6.0, 8.0))
    assignment = anchor_ops.assign_anchor_targets(anchors, [])
    assert np.all(assignment.labels == anchor_ops.NEGATIVE)


def test_hand_grid_matches_brute_force():
    anchors = np.array([
        [0, 0, 10, 10],
        [4, 0, 14, 10],
        [2, 2, 12, 12],
        [30, 30, 40, 40],
    ], dtype=float)
    hulls = [[3, 1, 13, 11]]
    assignment = anchor_ops.assign_anchor_targets(anchors, [rect_with_hull(h) for h in hulls])

    assert assignment.labels.tolist() == brute_force_labels(anchors, hulls)


def test_random_grids_match_brute_force():
    rng = np.random.default_rng(7)

    for _ in range(50):
        corners = rng.uniform(0, 60, size=(12, 2))
        sizes = rng.uniform(5, 25, size=(12, 2))
        anchors = np.hstack([corners, corners + sizes])
        hull_corners = rng.uniform(0, 60, size=(2, 2))
        hulls = np.hstack([hull_corners, hull_corners + rng.uniform(5, 25, size=(2, 2))])
        assignment = anchor_ops.assign_anchor_targets(anchors, [rect_with_hull(h) for h in hulls])

        assert assignment.labels.tolist() == brute_force_labels(anchors, hulls.tolist())


def test_best_anchor_is_forced_positive():
    anchors = np.array([[0, 0, 10, 10], [0, 0, 40, 40]], dtype=float)
    assignment = anchor_ops.assign_anchor_targets(anchors, [rect_with_hull([0, 0, 12, 12])])

    # IoU 100/144 for the first anchor, 144/1600 for the second
    assert assignment.labels.tolist() == [1, 0]

    low = anchor_ops.assign_anchor_targets(anchors[1:], [rect_with_hull([0, 0, 12, 12])])
    assert low.labels.tolist() == [1]


def test_encode_decode_inverse():
    rng = np.random.default_rng(3)
    anchors = anchor_ops.generate_anchors((3, 3), (60, 60), scales=(10.0, 20.0, 30.0))
    xy = rng.uniform(0, 50, size=(anchors.shape[0], 2))
    boxes = np.hstack([xy, xy + rng.uniform(5, 30, size=xy.shape)])
    deltas = anchor_ops.encode_boxes(anchors, boxes)

    np.testing.assert_allclose(anchor_ops.decode_boxes(anchors, deltas), boxes, atol=1e-9)


def test_decode_clamps_large_log_deltas():
    box = anchor_ops.decode_boxes([[0, 0, 16, 16]], [[0, 0, 50.0, 50.0]])[0]
    assert box[2] - box[0] == pytest.approx(1000.0)


def test_clip_boxes():
    clipped = anchor_ops.clip_boxes([[-5, -5, 200, 300]], (210, 150))
    np.testing.assert_array_equal(clipped, [[0, 0, 150, 210]])


def test_score_order_breaks_ties_by_index():
    assert anchor_ops.score_order([0.5, 0.9, 0.5, 0.9]).tolist() == [1, 3, 0, 2]


def test_nms():
    boxes = [
        [0, 0, 10, 10],
        [1, 0, 11, 10],
        [20, 20, 30, 30],
        [0, 0, 10, 10],
    ]
    scores = [0.9, 0.8, 0.7, 0.95]

    assert anchor_ops.nms(boxes, scores, 0.5) == [3, 2]
    assert anchor_ops.nms(boxes, scores, 1.0) == [3, 0, 1, 2]
    assert anchor_ops.nms([], [], 0.5) == []
