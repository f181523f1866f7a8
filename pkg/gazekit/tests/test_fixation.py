import math

import numpy as np
import pytest

from gazekit.exceptions import DegenerateTraceError, EmptyInputError
from gazekit.fixation import (D_MAX, T_MIN, FixationSegment, detect_fixations,
                              dispersion, fix_nonfix_ratio, fixation_center,
                              fixation_time, scanpath_length,
                              segments_from_records, segments_to_records,
                              summarize)
from gazekit.synth import SynthSpec, synth_trace
from gazekit.trace import GazeTrace


def _trace(x, y, rate=200., valid=None, t0=0.):
    n_samples = len(x)
    if valid is None:
        valid = np.ones(n_samples, dtype=bool)
    return GazeTrace(t=t0 + np.arange(n_samples) / rate, x=x, y=y,
                     valid=valid, width=1280, height=1024)


def _oracle(trace, t_min, d_max):
    """Maximal-window I-DT scan straight from the definition."""
    t, x, y, valid = trace.t, trace.x, trace.y, trace.valid
    n_samples = len(t)

    def spread(i, j):
        return ((x[i:j + 1].max() - x[i:j + 1].min())
                + (y[i:j + 1].max() - y[i:j + 1].min()))

    segments = []
    i = 0
    while i < n_samples:
        j = i
        while j < n_samples and t[j] - t[i] < t_min:
            j += 1
        if j == n_samples:
            break
        if not valid[i:j + 1].all() or spread(i, j) > d_max:
            i += 1
            continue
        while (j + 1 < n_samples and valid[j + 1]
               and spread(i, j + 1) <= d_max):
            j += 1
        segments.append((i, j))
        i = j + 1
    return segments


def _random_trace(rng):
    n_samples = rng.randint(1, 201)
    t = np.cumsum(rng.uniform(0.002, 0.02, size=n_samples))
    steps = np.where(rng.uniform(size=(n_samples, 2)) < 0.05,
                     rng.normal(0, 80, size=(n_samples, 2)),
                     rng.normal(0, 3, size=(n_samples, 2)))
    xy = 640 + np.cumsum(steps, axis=0)
    valid = rng.uniform(size=n_samples) > 0.05
    x = np.where(valid, xy[:, 0], np.nan)
    y = np.where(valid, xy[:, 1], np.nan)
    return GazeTrace(t=t, x=x, y=y, valid=valid, width=1280, height=1024)


def test_detection_matches_brute_force_oracle():
    rng = np.random.RandomState(0)
    n_found = 0
    for _ in range(1000):
        trace = _random_trace(rng)
        t_min = rng.choice([0.03, 0.05, T_MIN])
        d_max = rng.choice([10., 25., D_MAX])
        segments = detect_fixations(trace, t_min=t_min, d_max=d_max)
        expected = _oracle(trace, t_min, d_max)
        assert [(s.start_index, s.end_index) for s in segments] == expected
        for segment in segments:
            assert segment.dispersion == dispersion(
                trace, segment.start_index, segment.end_index)
        n_found += len(segments)
    # the generator must exercise the detector
    assert n_found > 100


def test_threshold_fidelity_on_synthetic_suite():
    for seed in range(50):
        spec = SynthSpec(seed=seed, n_fixations=4, jitter_sigma=2.)
        trace, _ = synth_trace(spec)
        for segment in detect_fixations(trace):
            assert segment.duration >= T_MIN
            assert segment.dispersion <= D_MAX


def test_constant_trace_is_one_fixation():
    trace = _trace(np.full(50, 300.), np.full(50, 200.))
    (segment,) = detect_fixations(trace)
    assert (segment.start_index, segment.end_index) == (0, 49)
    assert segment.center == (300., 200.)
    assert segment.dispersion == 0.
    assert segment.duration == pytest.approx(49 / 200.)


def test_short_trace_has_no_fixation():
    trace = _trace(np.full(10, 300.), np.full(10, 200.))
    assert detect_fixations(trace) == []


def test_invalid_sample_closes_fixation():
    valid = np.ones(100, dtype=bool)
    valid[60] = False
    trace = _trace(np.full(100, 300.), np.full(100, 200.), valid=valid)
    segments = detect_fixations(trace)
    assert [(s.start_index, s.end_index) for s in segments] == [(0, 59),
                                                                (61, 99)]


def test_detection_is_invariant_to_time_shift():
    rng = np.random.RandomState(3)
    x = 500 + np.cumsum(rng.normal(0, 4, size=200))
    y = 400 + np.cumsum(rng.normal(0, 4, size=200))
    # t_min away from any multiple of the sampling interval
    reference = detect_fixations(_trace(x, y), t_min=0.1025, d_max=30.)
    shifted = detect_fixations(_trace(x, y, t0=12.5), t_min=0.1025,
                               d_max=30.)
    assert ([(s.start_index, s.end_index) for s in reference]
            == [(s.start_index, s.end_index) for s in shifted])


def test_detection_is_equivariant_to_translation():
    rng = np.random.RandomState(5)
    for _ in range(200):
        n_samples = rng.randint(20, 300)
        steps = np.rint(np.where(rng.uniform(size=(n_samples, 2)) < 0.05,
                                 rng.normal(0, 80, size=(n_samples, 2)),
                                 rng.normal(0, 3, size=(n_samples, 2))))
        x = np.clip(640 + np.cumsum(steps[:, 0]), 200, 1079)
        y = np.clip(512 + np.cumsum(steps[:, 1]), 200, 823)
        dx, dy = rng.randint(-150, 151, size=2)
        trace, moved = _trace(x, y), _trace(x + dx, y + dy)
        segments = detect_fixations(trace, t_min=0.05, d_max=25.)
        shifted = detect_fixations(moved, t_min=0.05, d_max=25.)
        assert ([(s.start_index, s.end_index, s.dispersion)
                 for s in segments]
                == [(s.start_index, s.end_index, s.dispersion)
                    for s in shifted])
        for a, b in zip(segments, shifted):
            assert b.center == pytest.approx((a.center[0] + dx,
                                              a.center[1] + dy))
        reference, translated = (summarize(trace, segments),
                                 summarize(moved, shifted))
        assert translated.n_fix == reference.n_fix
        assert translated.duration_stats == reference.duration_stats
        assert translated.ratio == reference.ratio
        for name in ('t_fix', 'scanpath_length', 'scanpath_speed',
                     'fixation_rate'):
            assert getattr(translated, name) == pytest.approx(
                getattr(reference, name), abs=1e-9)


def test_greedy_detection_is_not_monotone_in_d_max():
    # a wider threshold lets the first fixation swallow the head of the
    # second one, and the remainder is too short to be a fixation
    x = np.r_[np.zeros(11), np.full(3, 5.), np.full(8, 8.)]
    trace = _trace(x, np.full(22, 100.))
    tight = detect_fixations(trace, t_min=0.049, d_max=4.)
    wide = detect_fixations(trace, t_min=0.049, d_max=6.)
    assert [(s.start_index, s.end_index) for s in tight] == [(0, 10),
                                                             (11, 21)]
    assert [(s.start_index, s.end_index) for s in wide] == [(0, 13)]
    assert _oracle(trace, 0.049, 6.) == [(0, 13)]
    assert fixation_time(wide) < fixation_time(tight)


@pytest.mark.parametrize("kwargs", [{'t_min': 0.}, {'d_max': -1.}])
def test_bad_thresholds(kwargs):
    with pytest.raises(ValueError):
        detect_fixations(_trace(np.ones(5), np.ones(5)), **kwargs)


def test_empty_trace():
    trace = GazeTrace(t=[], x=[], y=[], valid=[], width=10, height=10)
    with pytest.raises(EmptyInputError):
        detect_fixations(trace)


def test_dispersion():
    trace = _trace([0., 10., 4.], [5., 1., 2.])
    assert dispersion(trace, 0, 2) == 14.
    assert dispersion(trace, 1, 1) == 0.
    with pytest.raises(ValueError):
        dispersion(trace, 2, 1)
    with pytest.raises(ValueError):
        dispersion(trace, 0, 3)


def test_fix_nonfix_ratio():
    assert fix_nonfix_ratio(1., 3.) == 0.5
    assert fix_nonfix_ratio(3., 3.) is None
    assert fix_nonfix_ratio(0., 3.) == 0.
    with pytest.raises(ValueError):
        fix_nonfix_ratio(4., 3.)


def test_scanpath_length():
    assert scanpath_length([(0, 0), (3, 4), (3, 0)]) == 9.
    assert scanpath_length([(1, 1)]) == 0.
    assert scanpath_length([]) == 0.


def test_fixation_center():
    trace = _trace([0., 2., 4., 100.], [1., 1., 4., 0.],
                   valid=np.array([True, True, True, False]))
    segment = FixationSegment(0, 2, 0., .01, (2., 2.), 7.)
    assert fixation_center(trace, segment) == (2., 2.)
    with pytest.raises(ValueError):
        fixation_center(trace,
                        FixationSegment(1, 3, .005, .015, (0., 0.), 0.))


def test_summarize_two_clusters():
    x = np.r_[np.full(40, 100.), np.full(40, 400.)]
    y = np.r_[np.full(40, 100.), np.full(40, 500.)]
    trace = _trace(x, y)
    segments = detect_fixations(trace)
    assert len(segments) == 2
    metrics = summarize(trace, segments)
    t_total = 79 / 200.
    assert metrics.n_fix == 2
    assert metrics.t_total == pytest.approx(t_total)
    assert metrics.t_fix == pytest.approx(2 * 39 / 200.)
    assert metrics.scanpath_length == pytest.approx(500.)
    assert metrics.scanpath_speed == pytest.approx(500. / t_total)
    assert metrics.fixation_rate == pytest.approx(2 / t_total)
    assert metrics.ratio == pytest.approx(0.39 / 0.005)
    assert metrics.duration_stats.std == pytest.approx(0.)
    assert fixation_time(segments) == metrics.t_fix


def test_summarize_single_fixation_rate():
    trace = _trace(np.full(60, 10.), np.full(60, 10.))
    metrics = summarize(trace, detect_fixations(trace))
    assert metrics.fixation_rate == pytest.approx(1 / trace.t_total)
    assert metrics.ratio is None


def test_summarize_without_fixation():
    trace = _trace(np.arange(30) * 100., np.zeros(30))
    metrics = summarize(trace, [])
    assert metrics.n_fix == 0
    assert metrics.duration_stats is None
    assert metrics.to_dict()['duration_stats'] == {'mean': None,
                                                   'median': None,
                                                   'std': None}
    with_hull = metrics.with_hull_area(2.)
    assert with_hull.hull_area_per_s == pytest.approx(2. / trace.t_total)


def test_summarize_zero_duration():
    trace = _trace([1.], [1.])
    with pytest.raises(DegenerateTraceError):
        summarize(trace, [])


def test_segment_records_round_trip():
    trace = _trace(np.full(50, 300.), np.full(50, 200.))
    segments = detect_fixations(trace)
    records = segments_to_records(segments)
    assert list(records[0]) == ['start_index', 'end_index', 'start_t_s',
                                'end_t_s', 'center_x', 'center_y',
                                'dispersion_px']
    assert segments_from_records(records, trace) == segments


def test_segment_records_are_checked_against_trace():
    trace = _trace(np.ones(10), np.ones(10))
    segment = FixationSegment(0, 12, 0., .06, (1., 1.), 0.)
    with pytest.raises(ValueError):
        segments_from_records([segment.to_dict()], trace)
    overlapping = [FixationSegment(0, 5, 0., .025, (1., 1.), 0.),
                   FixationSegment(4, 8, .02, .04, (1., 1.), 0.)]
    with pytest.raises(ValueError):
        segments_from_records(segments_to_records(overlapping), trace)


def test_detection_on_long_recording():
    trace, _ = synth_trace(SynthSpec(seed=1, n_fixations=300,
                                     jitter_sigma=1.5))
    segments = detect_fixations(trace)
    assert len(segments) == 300
    assert math.isclose(fixation_time(segments),
                        sum(s.duration for s in segments))
