"""
Deterministic synthetic gaze for tests and walkthroughs.

A synthetic trace alternates stationary fixations, jittered around random
centers, with linear saccades. The generating fixations are returned as
ground truth for the detector.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sklearn.utils import check_random_state

from .exceptions import SynthWarning
from .fixation import D_MAX, T_MIN, FixationSegment, dispersion
from .trace import ACTIVE_RATE, NATIVE_SHAPE, GazeTrace

logger = logging.getLogger(__name__)

MAX_PLACEMENT_TRIES = 1000


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic trace.

    Parameters
    ----------
    seed : int, default=0
        Fully determines the output.

    n_fixations : int, default=3

    fixation_duration_range : tuple of float, default=(0.2, 0.5)
        Fixation durations are drawn uniformly from this range, in seconds.

    saccade_duration : float, default=0.04
        Seconds between the last sample of a fixation and the first sample
        of the next one.

    jitter_sigma : float, default=0.0
        Standard deviation in pixels of the Gaussian jitter of fixation
        samples.

    rate : float, default=200.0
        Sampling rate in Hz.

    width, height : int, default=(1280, 1024)

    t_min, d_max : float, default=(0.10, 50.0)
        Detection thresholds the trace is designed for.
    """
    seed: int = 0
    n_fixations: int = 3
    fixation_duration_range: Tuple[float, float] = (0.2, 0.5)
    saccade_duration: float = 0.04
    jitter_sigma: float = 0.
    rate: float = ACTIVE_RATE
    width: int = NATIVE_SHAPE[0]
    height: int = NATIVE_SHAPE[1]
    t_min: float = T_MIN
    d_max: float = D_MAX

    def __post_init__(self):
        low, high = self.fixation_duration_range
        for name, value in (('n_fixations', self.n_fixations),
                            ('fixation duration', low),
                            ('saccade_duration', self.saccade_duration),
                            ('rate', self.rate), ('width', self.width),
                            ('height', self.height), ('t_min', self.t_min)):
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if high < low:
            raise ValueError(
                f"empty fixation_duration_range "
                f"{self.fixation_duration_range}")
        if not self.jitter_sigma >= 0:
            raise ValueError(
                f"jitter_sigma must be >= 0, got {self.jitter_sigma!r}")
        if not self.d_max >= 0:
            raise ValueError(f"d_max must be >= 0, got {self.d_max!r}")


def _place_centers(spec, rng, n_saccade):
    """Draw fixation centers far enough apart, in L1 distance, for every
    saccade sample to leave the dispersion threshold."""
    margin = min(3 * spec.jitter_sigma,
                 (min(spec.width, spec.height) - 1) / 4)
    low = np.array([margin, margin])
    high = np.array([spec.width - 1 - margin, spec.height - 1 - margin])
    required = (spec.d_max + 6 * spec.jitter_sigma) * (n_saccade + 1)

    centers = [rng.uniform(low, high)]
    for _ in range(spec.n_fixations - 1):
        best, best_step = None, -1.
        for _ in range(MAX_PLACEMENT_TRIES):
            candidate = rng.uniform(low, high)
            step = np.abs(candidate - centers[-1]).sum()
            if step > best_step:
                best, best_step = candidate, step
            if step > required:
                break
        if best_step <= required:
            warnings.warn(
                f"could not place fixation {len(centers)} at an L1 distance "
                f"above {required:.1f} px from the previous one",
                SynthWarning)
        centers.append(best)
    return centers


def synth_trace(spec=None):
    """Generate a synthetic trace and its generating fixations.

    Fixation ``k`` holds ``round(d_k * rate) + 1`` samples around its center
    and is followed by ``round(saccade_duration * rate) - 1`` samples on the
    segment to the next center. Sample ``i`` is taken at ``i / rate``.

    A :class:`SynthWarning` is emitted when a generated fixation is shorter
    than ``t_min``, spreads over more than ``d_max`` or has a saccade sample
    within ``d_max`` (L1) of one of its samples, because the detector
    cannot recover it exactly.

    Parameters
    ----------
    spec : SynthSpec, default=None
        Defaults to ``SynthSpec()``.

    Returns
    -------
    trace : GazeTrace

    segments : list of FixationSegment
    """
    spec = spec or SynthSpec()
    rng = check_random_state(spec.seed)
    n_saccade = max(int(round(spec.saccade_duration * spec.rate)) - 1, 1)
    centers = _place_centers(spec, rng, n_saccade)
    low, high = spec.fixation_duration_range

    x, y, spans, saccades = [], [], [], []
    for k, center in enumerate(centers):
        n_samples = int(round(rng.uniform(low, high) * spec.rate)) + 1
        start = len(x)
        jitter = rng.normal(0., spec.jitter_sigma, size=(n_samples, 2))
        x.extend(center[0] + jitter[:, 0])
        y.extend(center[1] + jitter[:, 1])
        spans.append((start, len(x) - 1))
        if k + 1 < len(centers):
            fractions = np.arange(1, n_saccade + 1) / (n_saccade + 1)
            path = center + np.outer(fractions, centers[k + 1] - center)
            saccades.append((len(x), len(x) + n_saccade))
            x.extend(path[:, 0])
            y.extend(path[:, 1])

    t = np.arange(len(x)) / spec.rate
    trace = GazeTrace(t=t, x=x, y=y, valid=np.ones(len(x), dtype=bool),
                      width=spec.width, height=spec.height,
                      nominal_rate=spec.rate)
    segments = [
        FixationSegment(
            start_index=start, end_index=end, start_t=float(trace.t[start]),
            end_t=float(trace.t[end]),
            center=(float(trace.x[start:end + 1].mean()),
                    float(trace.y[start:end + 1].mean())),
            dispersion=dispersion(trace, start, end))
        for start, end in spans]
    _check_recoverable(spec, trace, segments, saccades)
    logger.debug("generated %d samples with %d fixations", len(trace),
                 len(segments))
    return trace, segments


def _check_recoverable(spec, trace, segments, saccades):
    for k, segment in enumerate(segments):
        if segment.duration < spec.t_min:
            warnings.warn(
                f"fixation {k} lasts {segment.duration:.4f} s, below t_min "
                f"{spec.t_min}", SynthWarning)
        if segment.dispersion > spec.d_max:
            warnings.warn(
                f"fixation {k} spreads over {segment.dispersion:.1f} px, "
                f"above d_max {spec.d_max}", SynthWarning)

    points = np.column_stack([trace.x, trace.y])
    for k, (start, stop) in enumerate(saccades):
        path = points[start:stop]
        for segment in segments[k:k + 2]:
            fixation = points[segment.start_index:segment.end_index + 1]
            distance = np.abs(path[:, np.newaxis, :]
                              - fixation[np.newaxis, :, :]).sum(axis=2)
            if distance.min() <= spec.d_max:
                warnings.warn(
                    f"saccade {k} passes within {distance.min():.1f} px "
                    f"(L1) of a fixation sample", SynthWarning)
                return
