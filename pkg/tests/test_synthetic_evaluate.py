
import json

import numpy as np
import pytest

from graspwire import images
from graspwire.codec import CodecConfig
from graspwire.codec import CodecModel
from graspwire.codec import decode
from graspwire.codec import encode
from graspwire.grasp.annotation import Scene
from graspwire.grasp.evaluate import AccuracyReport
from graspwire.grasp.evaluate import BUCKETS
from graspwire.grasp.evaluate import bucket_of
from graspwire.grasp.evaluate import evaluate_detector
from graspwire.grasp.evaluate import ratio_sweep
from graspwire.grasp.evaluate import score_scene
from graspwire.grasp.rect import GraspCandidate
from graspwire.grasp.rect import GraspRect
from graspwire.grasp.synthetic import BACKGROUND
from graspwire.grasp.synthetic import bar_grasps
from graspwire.grasp.synthetic import blank_scene
from graspwire.grasp.synthetic import make_scenes

GRAY = images.normalize(np.array(BACKGROUND, dtype=np.uint8))


def candidate(rect, confidence=0.9):
    return GraspCandidate(rect, rect.bin, confidence)


def test_bar_grasps_cross_the_bar():
    rects = bar_grasps(50.0, 60.0, 40.0, 10.0, 0.0)

    assert [(r.x, r.y) for r in rects] == [(40.0, 60.0), (50.0, 60.0), (60.0, 60.0)]

    for rect in rects:
        assert rect.w == pytest.approx(16.0)
        assert rect.h == pytest.approx(9.0)
        assert rect.theta == -90.0


def test_make_scenes():
    scenes = make_scenes(4, seed=2)

    assert [s.name for s in scenes] == ['scene000', 'scene001', 'scene002', 'scene003']

    for scene in scenes:
        assert scene.image.shape == (3, 210, 150)
        assert scene.image.dtype == np.float32
        assert 1 <= len(scene.objects) <= 3
        assert all(len(rects) == 3 for rects in scene.objects)

        for rect in scene.truths:
            pixel = scene.image[:, int(round(rect.y)), int(round(rect.x))]
            assert np.all(pixel < GRAY - 0.1)


def test_make_scenes_is_seeded():
    a = make_scenes(2, seed=9)
    b = make_scenes(2, seed=9)

    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.image, y.image)
        assert [r.to_dict() for r in x.truths] == [r.to_dict() for r in y.truths]

    assert not np.array_equal(a[0].image, make_scenes(1, seed=10)[0].image)


def test_blank_scene():
    scene = blank_scene()

    assert scene.name == 'blank'
    assert scene.objects == []
    np.testing.assert_allclose(scene.image, np.broadcast_to(GRAY[:, None, None], (3, 210, 150)))


@pytest.mark.parametrize('count,bucket', [
    (0, 'single'),
    (1, 'single'),
    (2, 'fewer_than_ten'),
    (9, 'fewer_than_ten'),
    (10, 'ten_or_more'),
    (25, 'ten_or_more'),
])
def test_bucket_of(count, bucket):
    assert bucket_of(count) == bucket


@pytest.fixture
def two_object_scene():
    first = [GraspRect(40.0, 50.0, 30.0, 10.0, 0.0)]
    second = [GraspRect(110.0, 150.0, 30.0, 10.0, 45.0)]
    return Scene(np.zeros((3, 210, 150)), [first, second], 'two')


def test_score_scene(two_object_scene):
    hit = candidate(two_object_scene.objects[0][0])
    miss = candidate(GraspRect(75.0, 100.0, 30.0, 10.0, 0.0), 0.5)

    result = score_scene(two_object_scene, [hit, miss])
    assert result == ('two', 2, 2, 1, True, 1)

    result = score_scene(two_object_scene, [miss, hit])
    assert result.top1_success is False
    assert result.objects_found == 1

    assert score_scene(two_object_scene, []) == ('two', 2, 0, 0, False, 0)


def test_score_blank_scene():
    result = score_scene(blank_scene(), [candidate(GraspRect(10, 10, 5, 5, 0))])
    assert result == ('blank', 0, 1, 0, False, 0)


def test_accuracy_report(two_object_scene, tmp_path):
    both = [candidate(rects[0]) for rects in two_object_scene.objects]
    wrong = candidate(GraspRect(75.0, 100.0, 30.0, 10.0, 0.0))
    single = Scene(np.zeros((3, 210, 150)), [two_object_scene.objects[0]], 'single')

    report = AccuracyReport([
        score_scene(two_object_scene, both),
        score_scene(single, [wrong]),
        score_scene(blank_scene(), [wrong]),
    ])

    assert report.image_accuracy == pytest.approx(0.5)
    assert report.object_accuracy == pytest.approx(2.0 / 3.0)
    assert report.candidate_precision == pytest.approx(2.0 / 4.0)

    summary = report.to_dict()
    assert set(summary['buckets']) == set(BUCKETS)
    assert summary['buckets']['single']['image_accuracy'] == 0.0
    assert summary['buckets']['fewer_than_ten']['object_accuracy'] == 1.0
    assert summary['buckets']['ten_or_more']['image_accuracy'] is None
    assert [s['name'] for s in summary['scenes']] == ['two', 'single', 'blank']

    path = tmp_path / 'report.json'
    report.write_json(str(path))
    assert json.loads(path.read_text()) == json.loads(json.dumps(summary))


def test_empty_report():
    report = AccuracyReport([])

    assert report.image_accuracy is None
    assert report.object_accuracy is None
    assert report.candidate_precision is None


def test_evaluate_detector_runs_every_scene(detector):
    scenes = make_scenes(2, seed=4) + [blank_scene()]
    report = evaluate_detector(detector, scenes)

    assert [r.name for r in report.results] == ['scene000', 'scene001', 'blank']
    assert all(r.successes <= r.candidates for r in report.results)


def test_evaluate_detector_through_a_codec(detector, codec):
    scenes = make_scenes(2, seed=4)
    reconstructed = [
        Scene(decode(codec, encode(codec, scene.image)), scene.objects, scene.name)
        for scene in scenes
    ]

    through = evaluate_detector(detector, scenes, codec)
    assert through.to_dict() == evaluate_detector(detector, reconstructed).to_dict()


def test_ratio_sweep_orders_by_ratio(detector, codec):
    scenes = make_scenes(2, seed=4)
    small = CodecModel(CodecConfig(latent_channels=1, residual_blocks=1, features=4), seed=0)
    points = ratio_sweep(detector, scenes, [small, codec])

    assert [round(p.compression_ratio, 2) for p in points] == [100.0, 4.07, 2.04]
    assert points[0].model_id is None
    assert points[1].model_id == codec.model_id
    assert points[0].report.to_dict() == evaluate_detector(detector, scenes).to_dict()
    assert points[2].report.to_dict() == evaluate_detector(detector, scenes, small).to_dict()

    d = points[1].to_dict()
    assert d['model_id'] == '{:016x}'.format(codec.model_id)
    assert 'scenes' not in d
    assert set(BUCKETS) == set(d['buckets'])
