import json
from enum import Enum

import numpy as np
import pytest

from gazekit import config_context
from gazekit.exceptions import GazeDataError, ShapeError
from gazekit.formats import (dump_json, parse_sgm, pgm_bytes, read_sgm,
                             sgm_bytes, write_pgm, write_sgm)
from gazekit.spatial import SaliencyGrid


def test_sgm_layout():
    grid = SaliencyGrid(np.array([[0., 1., 2.], [3., 4., 5.]]))
    data = sgm_bytes(grid)
    assert data.startswith(b'SGM 3 2\n')
    payload = np.frombuffer(data[len(b'SGM 3 2\n'):], dtype='<f4')
    np.testing.assert_array_equal(payload, np.arange(6))


def test_sgm_file_round_trip_is_bit_identical(tmp_path):
    rng = np.random.RandomState(0)
    values = rng.uniform(0, 10, size=(128, 160)).astype(np.float32)
    path = tmp_path / "frame.sgm"
    write_sgm(values, path)
    grid = read_sgm(path)
    assert grid.values.astype(np.float32).tobytes() == values.tobytes()
    write_sgm(grid, tmp_path / "again.sgm")
    assert (tmp_path / "again.sgm").read_bytes() == path.read_bytes()


def test_sgm_rounds_float64_grids_once():
    values = np.array([[0.1, 1 / 3]])
    decoded = parse_sgm(sgm_bytes(values)).values
    assert not np.array_equal(decoded, values)
    np.testing.assert_array_equal(decoded, values.astype(np.float32))
    assert sgm_bytes(decoded) == sgm_bytes(values)


def test_sgm_negative_values_are_clamped():
    grid = parse_sgm(sgm_bytes(np.array([[-1., 2.]])))
    np.testing.assert_array_equal(grid.values, [[0., 2.]])


@pytest.mark.parametrize("data, error", [
    (b'PGM 2 2\n' + bytes(16), GazeDataError),
    (b'SGM 2\n' + bytes(16), GazeDataError),
    (b'SGM 0 2\n', GazeDataError),
    (b'SGM 2 2\n' + bytes(12), ShapeError),
    (b'SGM 1 1\n' + np.array([np.nan], dtype='<f4').tobytes(),
     GazeDataError),
])
def test_sgm_errors(data, error):
    with pytest.raises(error):
        parse_sgm(data)


def test_pgm_scaling(tmp_path):
    data = pgm_bytes(np.array([[0., 1.], [2., 4.]]))
    header = b'P5\n2 2\n255\n'
    assert data.startswith(header)
    assert list(data[len(header):]) == [0, 64, 128, 255]
    assert pgm_bytes(np.full((1, 3), 7.)).endswith(bytes(3))
    write_pgm(np.ones((2, 2)), tmp_path / "flat.pgm")
    assert (tmp_path / "flat.pgm").read_bytes() == header + bytes(4)


class Color(str, Enum):
    RED = 'red'


def test_dump_json_keeps_order_and_precision():
    text = dump_json({'b': 0.1, 'a': [1, None, True], Color.RED: Color.RED,
                      'n': np.int64(3), 'x': np.float64(1 / 3),
                      'nan': float('nan')})
    content = json.loads(text)
    assert list(content) == ['b', 'a', 'red', 'n', 'x', 'nan']
    assert content['b'] == 0.1
    assert content['x'] == 1 / 3
    assert content['red'] == 'red'
    assert content['nan'] is None
    assert '0.10000000000000001' in text


def test_dump_json_digits_follow_configuration():
    with config_context(float_digits=4):
        assert json.loads(dump_json({'x': 1 / 3})) == {'x': 0.3333}
    assert dump_json({}) == '{}\n'
    assert dump_json([]) == '[]\n'
    with pytest.raises(TypeError):
        dump_json({'x': object()})
