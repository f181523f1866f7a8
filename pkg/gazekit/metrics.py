"""
Saliency evaluation metrics (KLD, CC, SIM, NSS), the overlap of fixation
density maps and the per-frame evaluation protocol of saliency predictions.

The metric functions accept :class:`~gazekit.spatial.SaliencyGrid` objects
as well as plain 2-D arrays.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed
from scipy import ndimage

from ._config import get_config
from .exceptions import (ContractError, DegenerateDistributionError,
                         DegenerateError, DegenerateTargetError,
                         DegenerateVarianceError, ShapeError)
from .spatial import PROBABILITY_TOL, SaliencyGrid

logger = logging.getLogger(__name__)

METRICS = ('kld', 'cc', 'sim', 'nss')


def _values(grid):
    if isinstance(grid, SaliencyGrid):
        return grid.values
    values = np.asarray(grid, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got shape {values.shape}")
    return values


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"grid shapes differ: {a.shape} and {b.shape}")


def _eps(eps):
    return get_config()['eps'] if eps is None else eps


def _zscore(values, eps, name):
    spread = values.max() - values.min()
    std = values.std()
    if not (spread > 0 and std > eps * spread):
        raise DegenerateVarianceError(
            f"{name} has zero variance (std={std!r}), it cannot be z-scored")
    return (values - values.mean()) / std


def kld(g, p, eps=None):
    """Kullback-Leibler divergence of a prediction from the ground truth.

    Both maps are clamped at 0 and normalized as ``m / (sum(m) + eps)``,
    then ``sum(g * log(eps + g / (eps + p)))`` is returned.

    Parameters
    ----------
    g : SaliencyGrid or array-like of shape (height, width)
        Ground truth.

    p : SaliencyGrid or array-like of shape (height, width)
        Prediction.

    eps : float, default=None
        Stability constant, configuration ``eps`` when None.

    Returns
    -------
    divergence : float
    """
    eps = _eps(eps)
    g, p = np.maximum(_values(g), 0.), np.maximum(_values(p), 0.)
    _check_shapes(g, p)
    g_sum = g.sum()
    if not g_sum > 0:
        raise DegenerateTargetError("ground-truth map sums to zero")
    g = g / (g_sum + eps)
    p = p / (p.sum() + eps)
    return float(np.sum(g * np.log(eps + g / (eps + p))))


def cc(y, y_hat, eps=None):
    """Pearson correlation coefficient of the flattened maps.

    Raises :class:`DegenerateVarianceError` when a map is constant, or its
    population standard deviation is below ``eps`` times its value range.
    """
    eps = _eps(eps)
    y, y_hat = _values(y), _values(y_hat)
    _check_shapes(y, y_hat)
    return float(np.mean(_zscore(y, eps, 'ground truth')
                         * _zscore(y_hat, eps, 'prediction')))


def sim(p, q):
    """Similarity (histogram intersection) of two maps.

    Both maps are clamped at 0 and divided by their sum before
    ``sum(min(p, q))`` is taken; the result lies in [0, 1].
    """
    p, q = np.maximum(_values(p), 0.), np.maximum(_values(q), 0.)
    _check_shapes(p, q)
    p_sum, q_sum = p.sum(), q.sum()
    if not (p_sum > 0 and q_sum > 0):
        raise DegenerateDistributionError(
            "a map sums to zero and cannot be normalized")
    return float(np.minimum(p / p_sum, q / q_sum).sum())


def nss(y, y_hat, eps=None):
    """Normalized scanpath saliency.

    The prediction is z-scored (population standard deviation) and read at
    the peak of the ground truth. Ties of the peak go to the first cell in
    row-major order.

    Parameters
    ----------
    y : SaliencyGrid or array-like of shape (height, width)
        Ground truth.

    y_hat : SaliencyGrid or array-like of shape (height, width)
        Prediction.

    eps : float, default=None
        Variance threshold relative to the value range of the prediction,
        configuration ``eps`` when None.

    Returns
    -------
    score : float
    """
    eps = _eps(eps)
    y, y_hat = _values(y), _values(y_hat)
    _check_shapes(y, y_hat)
    if y.max() == y.min():
        raise DegenerateTargetError("ground truth has no peak")
    z = _zscore(y_hat, eps, 'prediction')
    return float(z.flat[np.argmax(y)])


def _is_probability(values):
    return (np.all(values >= 0)
            and abs(values.sum() - 1.) <= PROBABILITY_TOL)


def fdm_sim(a, b):
    """Histogram intersection of two probability fixation density maps.

    Arrays are accepted when they already are distributions; anything else
    raises :class:`ContractError`, normalize with
    :meth:`SaliencyGrid.normalized` first.
    """
    for name, grid in (('a', a), ('b', b)):
        if isinstance(grid, SaliencyGrid):
            if not grid.probability:
                raise ContractError(
                    f"fdm_sim needs probability maps, {name} is not marked "
                    f"as one")
        elif not _is_probability(_values(grid)):
            raise ContractError(
                f"fdm_sim needs probability maps, {name} does not sum to 1")
    a, b = _values(a), _values(b)
    _check_shapes(a, b)
    return float(np.minimum(a, b).sum())


def fdm_cc(a, b, eps=None):
    """Pearson correlation of two unnormalized fixation density maps."""
    return cc(a, b, eps=eps)


def resize_bilinear(grid, width, height):
    """Bilinear resampling to ``width x height`` with half-pixel centers.

    Output pixel ``(i, j)`` samples the input at
    ``((j + 0.5) * w / width - 0.5, (i + 0.5) * h / height - 0.5)``; samples
    beyond the outer pixel centers take the edge value.

    Returns
    -------
    grid : SaliencyGrid
    """
    if width <= 0 or height <= 0:
        raise ValueError(
            f"width and height must be positive, got {width}x{height}")
    values = _values(grid)
    if values.shape == (height, width):
        return SaliencyGrid.from_array(values)
    zoom = (height / values.shape[0], width / values.shape[1])
    resized = ndimage.zoom(values, zoom, order=1, mode='nearest',
                           grid_mode=True)
    if resized.shape != (height, width):
        raise ShapeError(
            f"resampling produced {resized.shape}, expected "
            f"{(height, width)}")
    return SaliencyGrid.from_array(resized)


@dataclass(frozen=True)
class FrameScore:
    """Scores of one frame, ``None`` where a metric is undefined.

    ``valid`` is False when the ground truth of the frame is empty; no
    score of such a frame enters the averages.
    """
    frame_index: int
    kld: Optional[float]
    cc: Optional[float]
    sim: Optional[float]
    nss: Optional[float]
    valid: bool

    def is_defined(self, metric):
        return self.valid and getattr(self, metric) is not None

    def to_dict(self):
        record = {'i': self.frame_index}
        record.update({metric: getattr(self, metric) for metric in METRICS})
        record.update({f'valid_{metric}': self.is_defined(metric)
                       for metric in METRICS})
        return record


@dataclass(frozen=True)
class EvaluationResult:
    frames: List[FrameScore]
    summary: Dict[str, Optional[float]]
    n_frames_used: Dict[str, int]

    def to_dict(self):
        summary = dict(self.summary)
        summary['n_frames_used_per_metric'] = dict(self.n_frames_used)
        return {'frames': [frame.to_dict() for frame in self.frames],
                'summary': summary}


def _score_frame(index, gt, pred, eps):
    gt = _values(gt)
    if not gt.sum() > 0:
        return FrameScore(index, None, None, None, None, valid=False)
    pred = np.clip(_values(pred), 0., 1.)
    pred = resize_bilinear(pred, gt.shape[1], gt.shape[0]).values

    scores = {}
    for name, metric in (('kld', lambda: kld(gt, pred, eps=eps)),
                         ('cc', lambda: cc(gt, pred, eps=eps)),
                         ('sim', lambda: sim(gt, pred)),
                         ('nss', lambda: nss(gt, pred, eps=eps))):
        try:
            scores[name] = metric()
        except DegenerateError as exc:
            logger.debug("frame %d: %s undefined (%s)", index, name, exc)
            scores[name] = None
    return FrameScore(index, valid=True, **scores)


def _summarize(frames):
    summary, n_used = {}, {}
    for metric in METRICS:
        values = [getattr(frame, metric) for frame in frames
                  if frame.is_defined(metric)]
        n_used[metric] = len(values)
        summary[metric] = math.fsum(values) / len(values) if values else None
    return summary, n_used


def evaluate_sequence(gt_frames, pred_frames, pred_native_w=None,
                      pred_native_h=None, eps=None, n_jobs=None):
    """Score a sequence of predicted saliency frames against ground truth.

    Every prediction is clamped to [0, 1] and resized bilinearly to the
    resolution of its ground-truth frame before KLD, CC, SIM and NSS are
    computed. Frames with an all-zero ground truth are invalid. A metric
    that is undefined on a frame (zero variance, flat ground truth) is
    left out of that metric's average only.

    Parameters
    ----------
    gt_frames : sequence of SaliencyGrid

    pred_frames : sequence of SaliencyGrid
        Same length as ``gt_frames``.

    pred_native_w, pred_native_h : int, default=None
        Expected prediction size, checked when given.

    eps : float, default=None
        Stability constant, configuration ``eps`` when None.

    n_jobs : int, default=None
        Number of joblib workers, configuration ``n_jobs`` when None.

    Returns
    -------
    result : EvaluationResult
        Per-frame scores and the mean of every metric over the frames where
        it is defined (``None`` when it is defined nowhere).
    """
    gt_frames, pred_frames = list(gt_frames), list(pred_frames)
    if len(gt_frames) != len(pred_frames):
        raise ShapeError(
            f"{len(gt_frames)} ground-truth frames but {len(pred_frames)} "
            f"predicted frames")
    if (pred_native_w is None) != (pred_native_h is None):
        raise ValueError("pred_native_w and pred_native_h go together")
    if pred_native_w is not None:
        for index, pred in enumerate(pred_frames):
            if _values(pred).shape != (pred_native_h, pred_native_w):
                raise ShapeError(
                    f"prediction {index} has shape {_values(pred).shape}, "
                    f"expected {(pred_native_h, pred_native_w)}")
    eps = _eps(eps)
    if n_jobs is None:
        n_jobs = get_config()['n_jobs']

    frames = Parallel(n_jobs=n_jobs)(
        delayed(_score_frame)(index, gt, pred, eps)
        for index, (gt, pred) in enumerate(zip(gt_frames, pred_frames)))
    summary, n_used = _summarize(frames)
    n_invalid = sum(not frame.valid for frame in frames)
    if n_invalid:
        logger.info("%d of %d frames have an empty ground truth", n_invalid,
                    len(frames))
    return EvaluationResult(frames=frames, summary=summary,
                            n_frames_used=n_used)


def combine_evaluations(results):
    """Pool the frames of several evaluated videos into one summary."""
    frames = [frame for result in results for frame in result.frames]
    summary, n_used = _summarize(frames)
    return EvaluationResult(frames=frames, summary=summary,
                            n_frames_used=n_used)
