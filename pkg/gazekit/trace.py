"""
Gaze traces, trial metadata and coordinate conventions.

A :class:`GazeTrace` stores the samples of one recording as column arrays.
Coordinates are pixels of the stimulus frame with the origin at the top-left
corner and ``y`` increasing downward.
"""
import io
import json
import logging
from dataclasses import dataclass, field, asdict
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from .exceptions import (ContractError, EmptyInputError, GazeDataError,
                         GazeParseError, OrderingError)

logger = logging.getLogger(__name__)

# Resolution chain of the recordings: native stimulus frames, model input
# frames and label (gaze map) grids, as (width, height).
NATIVE_SHAPE = (1280, 1024)
MODEL_SHAPE = (640, 512)
LABEL_SHAPE = (160, 128)

ACTIVE_RATE = 200.
PASSIVE_RATE = 150.

CSV_COLUMNS = ('t', 'x', 'y', 'valid')


class Coords(str, Enum):
    PIXEL = 'pixel'
    NORMALIZED = 'normalized'


class Expertise(str, Enum):
    NOVICE = 'novice'
    INTERMEDIATE = 'intermediate'


class Modality(str, Enum):
    ACTIVE = 'active'
    PASSIVE = 'passive'


class Task(str, Enum):
    A = 'A'
    B = 'B'
    C = 'C'
    D = 'D'


class GazeSample(NamedTuple):
    t: float
    x: float
    y: float
    valid: bool


def _readonly(array):
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GazeTrace:
    """Time-ordered gaze samples of one recording.

    Valid samples falling outside the frame are clamped to
    ``[0, width - 1] x [0, height - 1]`` on construction; the ``clamped``
    mask remembers which ones were moved. Invalid samples (blinks, low
    tracker confidence) are kept so that they count toward the recording
    duration, their coordinates may be NaN.

    Parameters
    ----------
    t : array-like of shape (n_samples,)
        Timestamps in seconds, strictly increasing, finite and >= 0.

    x, y : array-like of shape (n_samples,)
        Gaze position in pixels.

    valid : array-like of bool of shape (n_samples,)
        Tracker validity flag.

    width, height : int
        Stimulus frame size in pixels.

    nominal_rate : float, default=None
        Recording rate in Hz, informational only.

    clamped : array-like of bool, default=None
        Samples already clamped upstream (kept in the mask).
    """
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    valid: np.ndarray
    width: int
    height: int
    nominal_rate: Optional[float] = None
    clamped: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        t = np.array(self.t, dtype=np.float64).ravel()
        x = np.array(self.x, dtype=np.float64).ravel()
        y = np.array(self.y, dtype=np.float64).ravel()
        valid = np.array(self.valid, dtype=bool).ravel()
        n_samples = t.shape[0]
        if not x.shape[0] == y.shape[0] == valid.shape[0] == n_samples:
            raise ValueError(
                f"t, x, y and valid must have the same length, got "
                f"{t.shape[0]}, {x.shape[0]}, {y.shape[0]}, "
                f"{valid.shape[0]}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(
                f"width and height must be positive, got "
                f"{self.width}x{self.height}")

        if not np.all(np.isfinite(t)) or np.any(t < 0):
            bad = int(np.flatnonzero(~np.isfinite(t) | (t < 0))[0])
            raise GazeDataError(
                f"sample {bad}: timestamp {t[bad]!r} must be finite and >= 0")
        steps = np.diff(t)
        if np.any(steps <= 0):
            bad = int(np.flatnonzero(steps <= 0)[0]) + 1
            kind = 'duplicate' if steps[bad - 1] == 0 else 'decreasing'
            raise OrderingError(
                f"sample {bad}: {kind} timestamp {t[bad]!r} after "
                f"{t[bad - 1]!r}")
        if not np.all(np.isfinite(x[valid]) & np.isfinite(y[valid])):
            bad = int(np.flatnonzero(
                valid & ~(np.isfinite(x) & np.isfinite(y)))[0])
            raise GazeDataError(
                f"sample {bad}: valid sample with non-finite position")

        x_max, y_max = self.width - 1, self.height - 1
        outside = valid & ((x < 0) | (x > x_max) | (y < 0) | (y > y_max))
        x = np.where(valid, np.clip(x, 0, x_max), x)
        y = np.where(valid, np.clip(y, 0, y_max), y)
        clamped = outside
        if self.clamped is not None:
            clamped = clamped | np.asarray(self.clamped, dtype=bool).ravel()
        if outside.any():
            logger.debug("clamped %d out-of-frame samples",
                         int(outside.sum()))

        object.__setattr__(self, 't', _readonly(t))
        object.__setattr__(self, 'x', _readonly(x))
        object.__setattr__(self, 'y', _readonly(y))
        object.__setattr__(self, 'valid', _readonly(valid))
        object.__setattr__(self, 'clamped', _readonly(clamped))

    @classmethod
    def from_samples(cls, samples, width, height, nominal_rate=None):
        """Build a trace from an iterable of ``(t, x, y, valid)``."""
        samples = list(samples)
        if samples:
            t, x, y, valid = zip(*samples)
        else:
            t = x = y = valid = ()
        return cls(t=t, x=x, y=y, valid=valid, width=width, height=height,
                   nominal_rate=nominal_rate)

    def __len__(self):
        return self.t.shape[0]

    @property
    def samples(self):
        return tuple(
            GazeSample(float(t), float(x), float(y), bool(v))
            for t, x, y, v in zip(self.t, self.x, self.y, self.valid))

    @property
    def t_first(self):
        return float(self.t[0]) if len(self) else 0.

    @property
    def t_last(self):
        return float(self.t[-1]) if len(self) else 0.

    @property
    def t_total(self):
        """Recording duration ``t_last - t_first`` in seconds."""
        return self.t_last - self.t_first

    @property
    def n_clamped(self):
        return int(self.clamped.sum())


@dataclass(frozen=True)
class ValidationReport:
    n_samples: int
    valid: int
    invalid: int
    clamped: int
    t_first: float
    t_last: float
    duration: float
    effective_rate: Optional[float]

    def to_dict(self):
        return asdict(self)


def validate_trace(trace):
    """Summarize the content of a trace without modifying it.

    Parameters
    ----------
    trace : GazeTrace

    Returns
    -------
    report : ValidationReport
        Counts of valid, invalid and clamped samples, time span and the
        effective sampling rate (inverse of the median sample interval,
        ``None`` with fewer than two samples).
    """
    n_valid = int(trace.valid.sum())
    rate = None
    if len(trace) > 1:
        rate = float(1. / np.median(np.diff(trace.t)))
    report = ValidationReport(
        n_samples=len(trace), valid=n_valid, invalid=len(trace) - n_valid,
        clamped=trace.n_clamped, t_first=trace.t_first,
        t_last=trace.t_last, duration=trace.t_total, effective_rate=rate)
    if trace.nominal_rate and rate is not None:
        if abs(rate - trace.nominal_rate) > 0.05 * trace.nominal_rate:
            logger.warning("effective rate %.1f Hz differs from nominal "
                           "%.1f Hz", rate, trace.nominal_rate)
    return report


def rescale_point(x, y, from_w, from_h, to_w, to_h):
    """Map a position between two resolutions of the same frame.

    Works element-wise on arrays as well as on scalars.

    Examples
    --------
    >>> rescale_point(640, 512, 1280, 1024, 640, 512)
    (320.0, 256.0)
    """
    for name, value in (('from_w', from_w), ('from_h', from_h),
                        ('to_w', to_w), ('to_h', to_h)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    return x * to_w / from_w, y * to_h / from_h


def rescale_trace(trace, width, height):
    """Return ``trace`` with its positions mapped to a ``width x height``
    frame."""
    x, y = rescale_point(trace.x, trace.y, trace.width, trace.height, width,
                         height)
    return GazeTrace(t=trace.t, x=x, y=y, valid=trace.valid, width=width,
                     height=height, nominal_rate=trace.nominal_rate)


def to_label_grid(x, y, width=NATIVE_SHAPE[0], height=NATIVE_SHAPE[1]):
    """Map a position from a ``width x height`` frame to the label grid."""
    return rescale_point(x, y, width, height, *LABEL_SHAPE)


def _content_lines(text):
    """Yield ``(line_number, line)`` for non-blank, non-comment lines."""
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith('#'):
            yield line_number, stripped


def _to_float(values, name, line_numbers):
    numeric = pd.to_numeric(values, errors='coerce')
    bad = numeric.isna() & (values.str.lower() != 'nan')
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise GazeParseError(
            f"non-numeric {name} value {values.iloc[row]!r}",
            line_numbers[row])
    # numpy parses each string with float(), which rounds correctly
    return values.to_numpy(dtype=object).astype(np.float64)


def parse_gaze_csv(data, width, height, coords=Coords.PIXEL,
                   nominal_rate=None):
    """Parse a gaze CSV log.

    The format has a ``t,x,y,valid`` header and one sample per row; lines
    starting with ``#`` are comments. Coordinates of invalid rows may be
    empty or ``nan``.

    Parameters
    ----------
    data : bytes or str
        UTF-8 content of the file.

    width, height : int
        Stimulus frame size in pixels.

    coords : {'pixel', 'normalized'}, default='pixel'
        With ``'normalized'`` coordinates are fractions of the frame and
        mapped with ``x * width``, ``y * height`` before clamping.

    nominal_rate : float, default=None
        Stored on the trace.

    Returns
    -------
    trace : GazeTrace
    """
    coords = Coords(coords)
    if isinstance(data, bytes):
        try:
            data = data.decode('utf-8')
        except UnicodeDecodeError as exc:
            raise GazeDataError(f"gaze file is not UTF-8: {exc}") from exc

    lines = list(_content_lines(data))
    if not lines:
        raise EmptyInputError("empty gaze file")
    header_line, header = lines[0]
    if tuple(col.strip() for col in header.split(',')) != CSV_COLUMNS:
        raise GazeParseError(
            f"expected header {','.join(CSV_COLUMNS)!r}, got {header!r}",
            header_line)
    rows = lines[1:]
    if not rows:
        raise EmptyInputError("gaze file has no samples")
    for line_number, line in rows:
        n_columns = line.count(',') + 1
        if n_columns != len(CSV_COLUMNS):
            raise GazeParseError(
                f"expected {len(CSV_COLUMNS)} columns, found {n_columns}",
                line_number)

    line_numbers = [line_number for line_number, _ in rows]
    frame = pd.read_csv(io.StringIO('\n'.join(line for _, line in rows)),
                        header=None, names=list(CSV_COLUMNS), dtype=str,
                        keep_default_na=False, skip_blank_lines=False)
    frame = frame.apply(lambda column: column.str.strip())

    valid_str = frame['valid']
    bad_valid = ~valid_str.isin(['0', '1'])
    if bad_valid.any():
        row = int(np.flatnonzero(bad_valid.to_numpy())[0])
        raise GazeParseError(
            f"valid must be 0 or 1, got {valid_str.iloc[row]!r}",
            line_numbers[row])
    valid = (valid_str == '1').to_numpy()

    t = _to_float(frame['t'], 't', line_numbers)
    position = {}
    for name in ('x', 'y'):
        column = frame[name]
        missing = column == ''
        if (missing & valid_str.eq('1')).any():
            row = int(np.flatnonzero((missing & valid_str.eq('1'))
                                     .to_numpy())[0])
            raise GazeParseError(f"missing {name} on a valid sample",
                                 line_numbers[row])
        position[name] = _to_float(column.mask(missing, 'nan'), name,
                                   line_numbers)

    finite_t = np.isfinite(t) & (t >= 0)
    if not finite_t.all():
        row = int(np.flatnonzero(~finite_t)[0])
        raise GazeParseError(f"timestamp {t[row]!r} must be finite and >= 0",
                             line_numbers[row])
    non_finite = valid & ~(np.isfinite(position['x'])
                           & np.isfinite(position['y']))
    if non_finite.any():
        row = int(np.flatnonzero(non_finite)[0])
        raise GazeParseError("non-finite position on a valid sample",
                             line_numbers[row])
    steps = np.diff(t)
    if np.any(steps <= 0):
        row = int(np.flatnonzero(steps <= 0)[0]) + 1
        kind = 'duplicate' if steps[row - 1] == 0 else 'decreasing'
        raise OrderingError(
            f"line {line_numbers[row]}: {kind} timestamp {t[row]!r} after "
            f"{t[row - 1]!r}")

    x, y = position['x'], position['y']
    if coords is Coords.NORMALIZED:
        x, y = x * width, y * height

    trace = GazeTrace(t=t, x=x, y=y, valid=valid, width=width, height=height,
                      nominal_rate=nominal_rate)
    logger.debug("parsed %d samples (%d valid, %d clamped)", len(trace),
                 int(valid.sum()), trace.n_clamped)
    return trace


def read_gaze_csv(path, width, height, coords=Coords.PIXEL,
                  nominal_rate=None):
    """Read a gaze CSV file from disk, see :func:`parse_gaze_csv`."""
    return parse_gaze_csv(Path(path).read_bytes(), width, height,
                          coords=coords, nominal_rate=nominal_rate)


def _format_float(value):
    return 'nan' if np.isnan(value) else repr(float(value))


def write_gaze_csv(trace):
    """Serialize a trace to the gaze CSV format in pixel coordinates.

    Floats use their shortest round-trip representation so parsing the
    output gives back bit-identical samples.
    """
    rows = [','.join(CSV_COLUMNS)]
    for t, x, y, valid in zip(trace.t, trace.x, trace.y, trace.valid):
        rows.append(f"{_format_float(t)},{_format_float(x)},"
                    f"{_format_float(y)},{int(valid)}")
    return '\n'.join(rows) + '\n'


TRIAL_KEYS = ('trial_id', 'participant_id', 'expertise', 'modality', 'task',
              'source_trial_id', 'score', 'penalty', 'completion_time_s',
              'trial_order', 'width', 'height')


@dataclass(frozen=True)
class TrialRecord:
    """Metadata of one demonstration (active) or one viewing (passive).

    A passive trial records the gaze of an observer watching the video of
    the active trial named by ``source_trial_id``.
    """
    trial_id: str
    participant_id: str
    expertise: Expertise
    modality: Modality
    task: Task
    source_trial_id: Optional[str] = None
    score: float = 0.
    penalty: float = 0.
    completion_time: float = 1.
    trial_order: int = 0
    width: int = NATIVE_SHAPE[0]
    height: int = NATIVE_SHAPE[1]

    def __post_init__(self):
        try:
            object.__setattr__(self, 'expertise', Expertise(self.expertise))
            object.__setattr__(self, 'modality', Modality(self.modality))
            object.__setattr__(self, 'task', Task(self.task))
        except ValueError as exc:
            raise ContractError(f"trial {self.trial_id!r}: {exc}") from exc
        if self.modality is Modality.PASSIVE and not self.source_trial_id:
            raise ContractError(
                f"passive trial {self.trial_id!r} has no source_trial_id")
        if self.modality is Modality.ACTIVE and self.source_trial_id:
            raise ContractError(
                f"active trial {self.trial_id!r} must not have a "
                f"source_trial_id")
        if not self.completion_time > 0:
            raise ContractError(
                f"trial {self.trial_id!r}: completion_time must be positive")
        for name in ('score', 'penalty', 'completion_time'):
            if not np.isfinite(getattr(self, name)):
                raise ContractError(
                    f"trial {self.trial_id!r}: {name} must be finite")

    @classmethod
    def from_dict(cls, record):
        keys = set(record)
        if keys != set(TRIAL_KEYS):
            missing = sorted(set(TRIAL_KEYS) - keys)
            extra = sorted(keys - set(TRIAL_KEYS))
            raise ContractError(
                f"trial {record.get('trial_id')!r}: missing keys {missing}, "
                f"unexpected keys {extra}")
        fields = {key: record[key] for key in TRIAL_KEYS
                  if key != 'completion_time_s'}
        fields['completion_time'] = record['completion_time_s']
        fields['trial_id'] = str(fields['trial_id'])
        fields['participant_id'] = str(fields['participant_id'])
        for key, default in (('width', NATIVE_SHAPE[0]),
                             ('height', NATIVE_SHAPE[1])):
            if fields[key] is None:
                fields[key] = default
        return cls(**fields)

    def to_dict(self):
        return {
            'trial_id': self.trial_id,
            'participant_id': self.participant_id,
            'expertise': self.expertise.value,
            'modality': self.modality.value,
            'task': self.task.value,
            'source_trial_id': self.source_trial_id,
            'score': self.score,
            'penalty': self.penalty,
            'completion_time_s': self.completion_time,
            'trial_order': self.trial_order,
            'width': self.width,
            'height': self.height,
        }


def parse_trial_json(data):
    """Parse trial metadata from a JSON object or a JSON list of objects.

    Returns
    -------
    trials : list of TrialRecord
    """
    try:
        content = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GazeDataError(f"invalid trial JSON: {exc}") from exc
    if isinstance(content, dict):
        content = [content]
    if not content:
        raise EmptyInputError("trial manifest is empty")
    trials = [TrialRecord.from_dict(record) for record in content]
    ids = [trial.trial_id for trial in trials]
    if len(set(ids)) != len(ids):
        duplicated = sorted({i for i in ids if ids.count(i) > 1})
        raise ContractError(f"duplicated trial ids {duplicated}")
    return trials


def read_trials(path):
    return parse_trial_json(Path(path).read_bytes())
