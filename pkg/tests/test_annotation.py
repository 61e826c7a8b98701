
import json

import numpy as np
import pytest

from graspwire import images
from graspwire.errors import DatasetError
from graspwire.errors import ParseError
from graspwire.grasp.annotation import format_rect_annotations
from graspwire.grasp.annotation import load_dataset
from graspwire.grasp.annotation import parse_rect_annotations
from graspwire.grasp.annotation import parse_rect_vertices
from graspwire.grasp.rect import GraspRect

SQUARE = '0 0\n10 0\n10 10\n0 10\n'


def test_parse_square():
    rects = parse_rect_annotations(SQUARE)

    assert len(rects) == 1
    assert rects.skipped == 0
    assert rects[0] == GraspRect(5, 5, 10, 10, 0)


def test_parse_empty():
    assert parse_rect_annotations('') == []
    assert parse_rect_annotations('\n\n') == []


def test_blank_lines_and_missing_final_newline():
    text = '\n0 0\n10 0\n\n10 10\n0 10'
    assert parse_rect_annotations(text) == [GraspRect(5, 5, 10, 10, 0)]


def test_vertex_lines_are_numbered():
    vertices = parse_rect_vertices('\n1.5 2e1\n  -3 .5\n')
    assert vertices == [(2, 1.5, 20.0), (3, -3.0, 0.5)]


def test_incomplete_group_reports_its_first_line():
    with pytest.raises(ParseError) as info:
        parse_rect_annotations(SQUARE + '\n1 1\n2 2\n')

    assert info.value.line == 6


@pytest.mark.parametrize('text,line', [
    ('0 0\n1 2 3\n', 2),
    ('0 0\nx y\n', 2),
    ('7\n', 1),
])
def test_garbage_is_a_parse_error(text, line):
    with pytest.raises(ParseError) as info:
        parse_rect_annotations(text)

    assert info.value.line == line
    assert 'line {}'.format(line) in str(info.value)


def test_non_finite_and_degenerate_groups_are_skipped():
    text = SQUARE + 'nan 0\n10 0\n10 10\n0 10\n' + '1 1\n1 1\n1 1\n1 1\n' + SQUARE
    rects = parse_rect_annotations(text)

    assert len(rects) == 2
    assert rects.skipped == 2


def test_format_then_parse():
    rects = [GraspRect(40.0, 30.0, 20.0, 6.0, 37.0), GraspRect(10.0, 12.5, 9.0, 4.0, -80.0)]
    parsed = parse_rect_annotations(format_rect_annotations(rects))

    for a, b in zip(parsed, rects):
        np.testing.assert_allclose(
            [a.x, a.y, a.w, a.h, a.theta], [b.x, b.y, b.w, b.h, b.theta], atol=1e-9)


@pytest.fixture
def dataset_dir(tmp_path, toy_images):
    images.save_image(str(tmp_path / 'b.png'), toy_images[0])
    images.save_image(str(tmp_path / 'a.png'), toy_images[1])
    (tmp_path / 'b.txt').write_text(SQUARE)
    (tmp_path / 'a.txt').write_text(SQUARE * 3)
    return tmp_path


def write_index(directory, index):
    path = directory / 'index.json'
    path.write_text(json.dumps(index))
    return str(path)


def test_load_dataset(dataset_dir):
    path = write_index(dataset_dir, {
        'b.png': 'b.txt',
        'a.png': {'annotations': 'a.txt', 'objects': [2, 1]},
    })
    scenes = load_dataset(path)

    assert [scene.name for scene in scenes] == ['a.png', 'b.png']
    assert [len(rects) for rects in scenes[0].objects] == [2, 1]
    assert len(scenes[0].truths) == 3
    assert len(scenes[1].objects) == 1
    assert scenes[0].image.shape == (3, 210, 150)
    assert scenes[0].image.dtype == np.float32


@pytest.mark.parametrize('index', [
    [],
    {'a.png': 'missing.txt'},
    {'a.png': 3},
    {'a.png': {'objects': [1]}},
    {'a.png': {'annotations': 'a.txt', 'objects': [2, 2]}},
    {'a.png': {'annotations': 'a.txt', 'objects': [3, 0]}},
])
def test_bad_index(dataset_dir, index):
    with pytest.raises(DatasetError):
        load_dataset(write_index(dataset_dir, index))


def test_unreadable_index(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(str(tmp_path / 'nothing.json'))

    (tmp_path / 'broken.json').write_text('{')

    with pytest.raises(DatasetError):
        load_dataset(str(tmp_path / 'broken.json'))
