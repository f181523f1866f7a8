"""
Dispersion-threshold (I-DT) fixation detection and the temporal and spatial
metrics derived from fixations.
"""
import logging
import math
from dataclasses import dataclass, asdict, replace
from typing import Optional, Tuple

import numpy as np

from .exceptions import DegenerateTraceError, EmptyInputError

logger = logging.getLogger(__name__)

T_MIN = 0.10
D_MAX = 50.


@dataclass(frozen=True)
class FixationSegment:
    """A detected fixation spanning samples ``start_index..end_index``
    (inclusive)."""
    start_index: int
    end_index: int
    start_t: float
    end_t: float
    center: Tuple[float, float]
    dispersion: float

    @property
    def duration(self):
        return self.end_t - self.start_t

    @property
    def n_samples(self):
        return self.end_index - self.start_index + 1

    def to_dict(self):
        return {
            'start_index': self.start_index,
            'end_index': self.end_index,
            'start_t_s': self.start_t,
            'end_t_s': self.end_t,
            'center_x': self.center[0],
            'center_y': self.center[1],
            'dispersion_px': self.dispersion,
        }

    @classmethod
    def from_dict(cls, record):
        return cls(start_index=int(record['start_index']),
                   end_index=int(record['end_index']),
                   start_t=float(record['start_t_s']),
                   end_t=float(record['end_t_s']),
                   center=(float(record['center_x']),
                           float(record['center_y'])),
                   dispersion=float(record['dispersion_px']))


def segments_to_records(segments):
    return [segment.to_dict() for segment in segments]


def segments_from_records(records, trace=None):
    """Rebuild segments from their JSON records.

    When ``trace`` is given the index spans are checked against it.
    """
    segments = [FixationSegment.from_dict(record) for record in records]
    if trace is not None:
        previous_end = -1
        for segment in segments:
            _check_span(trace, segment.start_index, segment.end_index)
            if segment.start_index <= previous_end:
                raise ValueError("fixation segments overlap or are not "
                                 "ordered")
            previous_end = segment.end_index
    return segments


@dataclass(frozen=True)
class DurationStats:
    mean: float
    median: float
    std: float


@dataclass(frozen=True)
class FixationMetrics:
    """Fixation summary of one trace.

    ``ratio`` and ``duration_stats`` are ``None`` when undefined. The hull
    fields are filled by :meth:`with_hull_area`.
    """
    n_fix: int
    t_fix: float
    t_total: float
    ratio: Optional[float]
    scanpath_length: float
    scanpath_speed: float
    fixation_rate: float
    duration_stats: Optional[DurationStats]
    hull_area: Optional[float] = None
    hull_area_per_s: Optional[float] = None

    def with_hull_area(self, area):
        return replace(self, hull_area=float(area),
                       hull_area_per_s=float(area) / self.t_total)

    def to_dict(self):
        record = asdict(self)
        if self.duration_stats is None:
            record['duration_stats'] = {'mean': None, 'median': None,
                                        'std': None}
        return record


def _check_span(trace, i, j):
    if not 0 <= i <= j < len(trace):
        raise ValueError(
            f"invalid sample range [{i}, {j}] for a trace of {len(trace)} "
            f"samples")


def dispersion(trace, i, j):
    """Spatial dispersion ``(max x - min x) + (max y - min y)`` of the
    samples ``i..j`` (inclusive)."""
    _check_span(trace, i, j)
    if not trace.valid[i:j + 1].all():
        raise ValueError(f"samples [{i}, {j}] include invalid samples")
    x = trace.x[i:j + 1]
    y = trace.y[i:j + 1]
    return float((x.max() - x.min()) + (y.max() - y.min()))


def _window_ends(t, t_min):
    """Index of the first sample ``j`` with ``t[j] - t[i] >= t_min`` for
    every ``i``, ``len(t)`` when there is none."""
    n_samples = t.shape[0]
    index = np.arange(n_samples)
    ends = np.searchsorted(t, t + t_min, side='left')
    # searchsorted compares t[j] with t[i] + t_min, the criterion is on the
    # difference; fix the rounding disagreements.
    while True:
        clipped = np.minimum(ends, n_samples - 1)
        short = (ends < n_samples) & (t[clipped] - t < t_min)
        if not short.any():
            break
        ends[short] += 1
    while True:
        previous = np.maximum(ends - 1, 0)
        long = (ends - 1 > index) & (t[previous] - t >= t_min)
        if not long.any():
            break
        ends[long] -= 1
    return ends


def _range_extrema(values, starts, stops, max_length):
    """Min and max of ``values[start:stop + 1]`` for every query through a
    sparse table truncated to ``max_length``."""
    minima = [values]
    maxima = [values]
    level = 1
    while (1 << level) <= max_length:
        half = 1 << (level - 1)
        minima.append(np.minimum(minima[-1][:-half], minima[-1][half:]))
        maxima.append(np.maximum(maxima[-1][:-half], maxima[-1][half:]))
        level += 1

    lengths = stops - starts + 1
    levels = np.frexp(lengths.astype(np.float64))[1] - 1
    low = np.empty(starts.shape[0])
    high = np.empty(starts.shape[0])
    for level in np.unique(levels):
        mask = levels == level
        left = starts[mask]
        right = stops[mask] - (1 << int(level)) + 1
        low[mask] = np.minimum(minima[level][left], minima[level][right])
        high[mask] = np.maximum(maxima[level][left], maxima[level][right])
    return low, high


def detect_fixations(trace, t_min=T_MIN, d_max=D_MAX):
    """Detect fixations with the dispersion-threshold (I-DT) algorithm.

    A window starting at a valid sample is opened over the shortest span
    lasting at least ``t_min``. If its dispersion is at most ``d_max`` it is
    extended one sample at a time while the dispersion stays within
    ``d_max``, emitted, and the search resumes after it; otherwise the
    window start slides by one sample. Invalid samples close any window.

    Parameters
    ----------
    trace : GazeTrace

    t_min : float, default=0.10
        Minimum fixation duration in seconds, measured between the first
        and last sample of the segment.

    d_max : float, default=50
        Maximum dispersion in pixels of the trace.

    Returns
    -------
    segments : list of FixationSegment
        Maximal, disjoint segments ordered in time.
    """
    n_samples = len(trace)
    if n_samples == 0:
        raise EmptyInputError("cannot detect fixations on an empty trace")
    if not t_min > 0:
        raise ValueError(f"t_min must be positive, got {t_min!r}")
    if not d_max >= 0:
        raise ValueError(f"d_max must be non-negative, got {d_max!r}")

    t = trace.t
    valid = trace.valid
    x = np.where(valid, trace.x, 0.)
    y = np.where(valid, trace.y, 0.)

    index = np.arange(n_samples)
    ends = _window_ends(t, t_min)
    stops = np.minimum(ends, n_samples - 1)
    invalid_before = np.concatenate([[0], np.cumsum(~valid)])
    clean = ((ends < n_samples)
             & (invalid_before[stops + 1] == invalid_before[index]))
    if not clean.any():
        logger.debug("no window of %.3f s without invalid samples", t_min)
        return []

    opened = np.flatnonzero(clean)
    max_length = int((stops[opened] - opened + 1).max())
    x_low = np.zeros(n_samples)
    x_high = np.zeros(n_samples)
    y_low = np.zeros(n_samples)
    y_high = np.zeros(n_samples)
    x_low[opened], x_high[opened] = _range_extrema(x, opened, stops[opened],
                                                   max_length)
    y_low[opened], y_high[opened] = _range_extrema(y, opened, stops[opened],
                                                   max_length)
    spread = (x_high - x_low) + (y_high - y_low)
    starts = opened[spread[opened] <= d_max]

    xs, ys, vs = x.tolist(), y.tolist(), valid.tolist()
    segments = []
    position = 0
    while position < starts.shape[0]:
        start = int(starts[position])
        end = int(stops[start])
        lo_x, hi_x = x_low[start], x_high[start]
        lo_y, hi_y = y_low[start], y_high[start]
        spread_end = spread[start]
        while end + 1 < n_samples and vs[end + 1]:
            new_x, new_y = xs[end + 1], ys[end + 1]
            lx, hx = min(lo_x, new_x), max(hi_x, new_x)
            ly, hy = min(lo_y, new_y), max(hi_y, new_y)
            candidate = (hx - lx) + (hy - ly)
            if candidate > d_max:
                break
            lo_x, hi_x, lo_y, hi_y = lx, hx, ly, hy
            spread_end = candidate
            end += 1
        segments.append(FixationSegment(
            start_index=start, end_index=end, start_t=float(t[start]),
            end_t=float(t[end]),
            center=(float(trace.x[start:end + 1].mean()),
                    float(trace.y[start:end + 1].mean())),
            dispersion=float(spread_end)))
        position = int(np.searchsorted(starts, end + 1))

    logger.debug("detected %d fixations in %d samples", len(segments),
                 n_samples)
    return segments


def fixation_time(segments):
    """Total fixation time, the sum of segment durations."""
    return math.fsum(segment.duration for segment in segments)


def fix_nonfix_ratio(t_fix, t_total, eps=1e-6):
    """Fixation to non-fixation time ratio ``t_fix / (t_total - t_fix)``.

    Returns ``None`` (undefined) when the non-fixation time is below
    ``eps``.
    """
    if t_fix < 0 or t_fix > t_total:
        raise ValueError(
            f"t_fix must lie in [0, t_total], got t_fix={t_fix!r}, "
            f"t_total={t_total!r}")
    non_fixation = t_total - t_fix
    if non_fixation < eps:
        return None
    return t_fix / non_fixation


def fixation_center(trace, segment):
    """Mean gaze position over the samples of a segment."""
    _check_span(trace, segment.start_index, segment.end_index)
    span = slice(segment.start_index, segment.end_index + 1)
    if not trace.valid[span].all():
        raise ValueError("segment includes invalid samples")
    return float(trace.x[span].mean()), float(trace.y[span].mean())


def scanpath_length(centers):
    """Sum of Euclidean distances between consecutive fixation centers."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    if centers.shape[0] < 2:
        return 0.
    hops = np.diff(centers, axis=0)
    return math.fsum(np.hypot(hops[:, 0], hops[:, 1]))


def summarize(trace, segments):
    """Duration-normalized fixation metrics of a trace.

    The convex hull fields are left empty, see
    :meth:`FixationMetrics.with_hull_area`.
    """
    t_total = trace.t_total
    if not t_total > 0:
        raise DegenerateTraceError(
            "trace spans zero time, metrics cannot be duration normalized")

    t_fix = fixation_time(segments)
    length = scanpath_length(
        [fixation_center(trace, segment) for segment in segments])
    durations = np.array([segment.duration for segment in segments])
    stats = None
    if durations.size:
        stats = DurationStats(mean=float(durations.mean()),
                              median=float(np.median(durations)),
                              std=float(durations.std()))
    return FixationMetrics(
        n_fix=len(segments), t_fix=t_fix, t_total=t_total,
        ratio=fix_nonfix_ratio(t_fix, t_total), scanpath_length=length,
        scanpath_speed=length / t_total,
        fixation_rate=len(segments) / t_total, duration_stats=stats)
