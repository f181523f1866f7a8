"""
File formats: SGM float grids, PGM previews and the JSON writer shared by
the command line.

SGM is an ASCII header ``SGM <width> <height>\\n`` followed by
``width * height`` little-endian float32 values, row-major, top row first.
"""
import json
import logging
import math
from enum import Enum
from pathlib import Path

import numpy as np

from ._config import get_config
from .exceptions import GazeDataError, ShapeError
from .spatial import SaliencyGrid

logger = logging.getLogger(__name__)

SGM_MAGIC = b'SGM'
SGM_DTYPE = np.dtype('<f4')


def sgm_bytes(grid):
    """Encode a grid (or a 2-D array) as SGM bytes.

    Values are stored as little-endian float32, so encoding a float64 grid
    rounds it. A grid read back from SGM encodes to the same bytes.
    """
    values = grid.values if isinstance(grid, SaliencyGrid) else grid
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got shape {values.shape}")
    height, width = values.shape
    header = b'%s %d %d\n' % (SGM_MAGIC, width, height)
    return header + values.astype(SGM_DTYPE).tobytes(order='C')


def parse_sgm(data):
    """Decode SGM bytes into a :class:`SaliencyGrid`.

    Negative values are clamped at 0.
    """
    newline = data.find(b'\n')
    header = data[:newline].split() if newline >= 0 else []
    if len(header) != 3 or header[0] != SGM_MAGIC:
        raise GazeDataError("not an SGM grid: bad header")
    try:
        width, height = int(header[1]), int(header[2])
    except ValueError as exc:
        raise GazeDataError(f"not an SGM grid: {exc}") from exc
    if width <= 0 or height <= 0:
        raise GazeDataError(f"invalid SGM size {width}x{height}")
    payload = data[newline + 1:]
    expected = width * height * SGM_DTYPE.itemsize
    if len(payload) != expected:
        raise ShapeError(
            f"SGM payload has {len(payload)} bytes, expected {expected} for "
            f"{width}x{height}")
    values = np.frombuffer(payload, dtype=SGM_DTYPE).reshape(height, width)
    if not np.all(np.isfinite(values)):
        raise GazeDataError("SGM grid holds non-finite values")
    return SaliencyGrid.from_array(values.astype(np.float64))


def write_sgm(grid, path):
    Path(path).write_bytes(sgm_bytes(grid))


def read_sgm(path):
    return parse_sgm(Path(path).read_bytes())


def pgm_bytes(grid):
    """Encode a grid as a binary PGM (P5, maxval 255) with linear min-max
    scaling. A constant grid maps to black."""
    values = grid.values if isinstance(grid, SaliencyGrid) else grid
    values = np.asarray(values, dtype=np.float64)
    low, high = values.min(), values.max()
    if high > low:
        scaled = np.floor((values - low) / (high - low) * 255 + 0.5)
    else:
        scaled = np.zeros_like(values)
    height, width = values.shape
    header = b'P5\n%d %d\n255\n' % (width, height)
    return header + scaled.astype(np.uint8).tobytes(order='C')


def write_pgm(grid, path):
    Path(path).write_bytes(pgm_bytes(grid))


def _encode_key(key):
    return json.dumps(str(key.value if isinstance(key, Enum) else key))


def _encode(obj, digits, indent, level):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, Enum):
        return json.dumps(obj.value)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return 'null'
        return format(value, f'.{digits}g')
    if isinstance(obj, str):
        return json.dumps(obj)

    pad = '\n' + ' ' * (indent * (level + 1))
    close = '\n' + ' ' * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [_encode_key(key) + ': '
                 + _encode(value, digits, indent, level + 1)
                 for key, value in obj.items()]
        return '{' + pad + (',' + pad).join(items) + close + '}'
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return '[]'
        items = [_encode(value, digits, indent, level + 1) for value in obj]
        return '[' + pad + (',' + pad).join(items) + close + ']'
    raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def dump_json(obj, digits=None, indent=2):
    """Serialize to JSON keeping the insertion order of the keys.

    Floats are written with ``digits`` significant digits (configuration
    ``float_digits``, 17 by default) and non-finite floats as ``null``.
    """
    if digits is None:
        digits = get_config()['float_digits']
    return _encode(obj, digits, indent, 0) + '\n'
