"""
Spatial summaries of gaze: convex hulls, per-frame Gaussian gaze heatmaps
and duration-weighted fixation density maps (FDM).
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from .exceptions import (ContractError, DegenerateDistributionError,
                         EmptyDensityError, EmptyInputError)
from .trace import LABEL_SHAPE, rescale_point

logger = logging.getLogger(__name__)

HEATMAP_SIGMA = 5.
HEATMAP_TRUNCATE = 3.
FDM_SIGMA = 30.
FDM_TRUNCATE = 3.
PROBABILITY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SaliencyGrid:
    """Non-negative 2-D float grid, row-major with shape (height, width).

    Parameters
    ----------
    values : array-like of shape (height, width)
        Finite, non-negative values.

    probability : bool, default=False
        Marks the grid as a distribution, its values must sum to 1.
    """
    values: np.ndarray
    probability: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise ValueError(
                f"grid values must be a non-empty 2-D array, got shape "
                f"{values.shape}")
        if not np.all(np.isfinite(values)):
            raise ContractError("grid values must be finite")
        if np.any(values < 0):
            raise ContractError("grid values must be non-negative")
        if self.probability and abs(values.sum() - 1.) > PROBABILITY_TOL:
            raise ContractError(
                f"probability grid sums to {values.sum()!r}, not 1")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_array(cls, values, clip_negative=True):
        """Wrap an arbitrary float array, clamping negatives at 0."""
        values = np.asarray(values, dtype=np.float64)
        if clip_negative:
            n_negative = int(np.sum(values < 0))
            if n_negative:
                logger.debug("clamped %d negative grid values", n_negative)
            values = np.maximum(values, 0.)
        return cls(values)

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def total(self):
        return float(self.values.sum())

    def normalized(self):
        """Return the grid divided by its sum, marked as a probability."""
        if self.probability:
            return self
        total = self.total()
        if not total > 0:
            raise DegenerateDistributionError("grid sums to zero")
        return SaliencyGrid(self.values / total, probability=True)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class HullPolygon:
    """Convex polygon with counter-clockwise vertices."""
    vertices: Tuple[Tuple[float, float], ...]
    area: float

    def contains(self, point, tol=1e-9):
        """Whether ``point`` lies inside or on the polygon."""
        vertices = self.vertices
        if len(vertices) == 1:
            return (abs(point[0] - vertices[0][0]) <= tol
                    and abs(point[1] - vertices[0][1]) <= tol)
        if len(vertices) == 2:
            a, b = vertices
            if abs(_cross(a, b, point)) > tol * max(1., _norm(a, b)):
                return False
            return (min(a[0], b[0]) - tol <= point[0] <= max(a[0], b[0]) + tol
                    and min(a[1], b[1]) - tol <= point[1]
                    <= max(a[1], b[1]) + tol)
        for a, b in zip(vertices, vertices[1:] + vertices[:1]):
            if _cross(a, b, point) < -tol * max(1., _norm(a, b)):
                return False
        return True


def _norm(a, b):
    return float(np.hypot(b[0] - a[0], b[1] - a[1]))


def _shoelace(vertices):
    if len(vertices) < 3:
        return 0.
    xy = np.asarray(vertices)
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _discard_interior(points):
    """Drop points strictly inside the quadrilateral of the four extreme
    points; they cannot be hull vertices."""
    corners = points[[np.argmin(points[:, 0]), np.argmin(points[:, 1]),
                      np.argmax(points[:, 0]), np.argmax(points[:, 1])]]
    inside = np.ones(points.shape[0], dtype=bool)
    for a, b in zip(corners, np.roll(corners, -1, axis=0)):
        inside &= ((b[0] - a[0]) * (points[:, 1] - a[1])
                   - (b[1] - a[1]) * (points[:, 0] - a[0])) > 0
    return points[~inside]


def convex_hull(points):
    """Convex hull of planar points with Graham's scan.

    Points are sorted lexicographically and the lower and upper chains are
    built by popping every vertex that does not make a strict left turn,
    so collinear boundary points are not vertices. One point or collinear
    points give a degenerate hull of area 0 made of the extreme points.

    Parameters
    ----------
    points : array-like of shape (n_points, 2)

    Returns
    -------
    hull : HullPolygon
        Counter-clockwise vertices starting at the lowest-x, lowest-y point,
        and the shoelace area.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if points.shape[0] == 0:
        raise EmptyInputError("cannot compute the hull of zero points")
    if not np.all(np.isfinite(points)):
        raise ValueError("hull points must be finite")
    if points.shape[0] > 64:
        points = _discard_interior(points)
    ordered = [tuple(p) for p in np.unique(points, axis=0).tolist()]
    if len(ordered) == 1:
        return HullPolygon(vertices=(ordered[0],), area=0.)

    lower = []
    for p in ordered:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(ordered):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    vertices = tuple(lower[:-1] + upper[:-1])
    return HullPolygon(vertices=vertices, area=_shoelace(vertices))


def gaze_hull(trace):
    """Convex hull of the valid samples of a trace."""
    points = np.column_stack([trace.x[trace.valid], trace.y[trace.valid]])
    if points.shape[0] == 0:
        raise EmptyInputError("trace has no valid sample")
    return convex_hull(points)


def _check_kernel(sigma, trunc):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if not trunc > 0:
        raise ValueError(f"trunc must be positive, got {trunc!r}")


def gaze_heatmap_frame(x, y, grid_w, grid_h, sigma=HEATMAP_SIGMA,
                       trunc=HEATMAP_TRUNCATE):
    """Truncated Gaussian centered on one gaze point.

    ``G(u, v) = exp(-((u - x)**2 + (v - y)**2) / (2 * sigma**2))`` at the
    integer pixel positions within ``trunc * sigma`` of ``(x, y)`` and 0
    elsewhere. The grid is not normalized.

    Parameters
    ----------
    x, y : float
        Gaze point in grid pixels.

    grid_w, grid_h : int
        Grid size.

    sigma : float, default=5.0

    trunc : float, default=3.0
        Truncation radius in units of sigma.

    Returns
    -------
    grid : SaliencyGrid
    """
    _check_kernel(sigma, trunc)
    u = np.arange(grid_w, dtype=np.float64)
    v = np.arange(grid_h, dtype=np.float64)
    squared = (u[np.newaxis, :] - x)**2 + (v[:, np.newaxis] - y)**2
    values = np.exp(-squared / (2 * sigma**2))
    radius = trunc * sigma
    values[squared > radius * radius] = 0.
    return SaliencyGrid(values)


def gaze_heatmap_sequence(trace, grid_w=LABEL_SHAPE[0],
                          grid_h=LABEL_SHAPE[1], fps=30.,
                          sigma=HEATMAP_SIGMA, trunc=HEATMAP_TRUNCATE):
    """Per-frame gaze heatmaps of a trace.

    Frame ``k`` covers ``[t_first + k / fps, t_first + (k + 1) / fps)``;
    its gaze point is the mean of the valid samples in that interval,
    rescaled from the trace frame to the grid. Frames without valid samples
    are all-zero grids.

    Returns
    -------
    frames : list of SaliencyGrid
    """
    _check_kernel(sigma, trunc)
    if not fps > 0:
        raise ValueError(f"fps must be positive, got {fps!r}")
    if len(trace) == 0:
        raise EmptyInputError("cannot render heatmaps of an empty trace")

    frame_of = np.floor((trace.t - trace.t_first) * fps).astype(np.int64)
    n_frames = int(frame_of[-1]) + 1
    valid = trace.valid
    counts = np.bincount(frame_of[valid], minlength=n_frames)
    sum_x = np.bincount(frame_of[valid], weights=trace.x[valid],
                        minlength=n_frames)
    sum_y = np.bincount(frame_of[valid], weights=trace.y[valid],
                        minlength=n_frames)

    frames = []
    empty = np.zeros((grid_h, grid_w))
    for count, total_x, total_y in zip(counts, sum_x, sum_y):
        if count == 0:
            frames.append(SaliencyGrid(empty))
            continue
        gx, gy = rescale_point(total_x / count, total_y / count, trace.width,
                               trace.height, grid_w, grid_h)
        frames.append(gaze_heatmap_frame(gx, gy, grid_w, grid_h, sigma,
                                         trunc))
    logger.debug("rendered %d frames, %d without gaze", n_frames,
                 int(np.sum(counts == 0)))
    return frames


def _impulse_position(value, size):
    return int(min(max(np.floor(value + 0.5), 0), size - 1))


def build_fdm(trace, segments, sigma=FDM_SIGMA, normalize=False,
              grid_shape=None):
    """Fixation density map of a trace.

    Each fixation adds its duration at the per-axis median of its valid
    samples, rounded to the nearest pixel. The impulse grid is then
    smoothed with an isotropic Gaussian truncated at 3 sigma; mass falling
    off the grid is lost.

    Parameters
    ----------
    trace : GazeTrace

    segments : list of FixationSegment
        Fixations detected on ``trace``.

    sigma : float, default=30
        Smoothing in pixels of the output grid.

    normalize : bool, default=False
        Divide by the sum and mark the grid as a probability.

    grid_shape : tuple of int (width, height), default=None
        Output grid, defaults to the trace frame size. Fixation positions
        are rescaled to it.

    Returns
    -------
    fdm : SaliencyGrid
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if normalize and not segments:
        raise EmptyDensityError(
            "cannot normalize a fixation density map without fixations")
    width, height = grid_shape or (trace.width, trace.height)

    impulses = np.zeros((height, width))
    for segment in segments:
        span = slice(segment.start_index, segment.end_index + 1)
        valid = trace.valid[span]
        if not valid.any():
            logger.warning("fixation [%d, %d] has no valid sample, skipped",
                           segment.start_index, segment.end_index)
            continue
        median_x = np.median(trace.x[span][valid])
        median_y = np.median(trace.y[span][valid])
        if grid_shape is not None:
            median_x, median_y = rescale_point(median_x, median_y,
                                               trace.width, trace.height,
                                               width, height)
        impulses[_impulse_position(median_y, height),
                 _impulse_position(median_x, width)] += segment.duration

    density = ndimage.gaussian_filter(impulses, sigma, mode='constant',
                                      cval=0., truncate=FDM_TRUNCATE)
    if normalize:
        total = density.sum()
        if not total > 0:
            raise EmptyDensityError("fixation density map sums to zero")
        return SaliencyGrid(density / total, probability=True)
    return SaliencyGrid(density)
