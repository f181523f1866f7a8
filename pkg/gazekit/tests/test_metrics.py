import math

import numpy as np
import pytest

from gazekit import config_context
from gazekit.exceptions import (ContractError, DegenerateDistributionError,
                                DegenerateTargetError,
                                DegenerateVarianceError, ShapeError)
from gazekit.fixation import detect_fixations
from gazekit.metrics import (cc, combine_evaluations, evaluate_sequence,
                             fdm_cc, fdm_sim, kld, nss, resize_bilinear, sim)
from gazekit.spatial import SaliencyGrid, build_fdm
from gazekit.trace import GazeTrace

EPS = 1e-7


def _cells(grid):
    grid = np.asarray(grid, dtype=np.float64)
    return [float(v) for row in grid for v in row]


def _oracle_kld(g, p, eps=EPS):
    g = [max(v, 0.) for v in _cells(g)]
    p = [max(v, 0.) for v in _cells(p)]
    g_sum, p_sum = sum(g), sum(p)
    total = 0.
    for gi, pi in zip(g, p):
        gi, pi = gi / (g_sum + eps), pi / (p_sum + eps)
        total += gi * math.log(eps + gi / (eps + pi))
    return total


def _oracle_moments(values):
    mean = sum(values) / len(values)
    std = math.sqrt(sum((v - mean)**2 for v in values) / len(values))
    return mean, std


def _oracle_cc(a, b):
    a, b = _cells(a), _cells(b)
    mean_a, std_a = _oracle_moments(a)
    mean_b, std_b = _oracle_moments(b)
    return sum((x - mean_a) / std_a * (y - mean_b) / std_b
               for x, y in zip(a, b)) / len(a)


def _oracle_sim(p, q):
    p, q = _cells(p), _cells(q)
    p_sum, q_sum = sum(p), sum(q)
    return sum(min(x / p_sum, y / q_sum) for x, y in zip(p, q))


def _oracle_nss(y, y_hat):
    y, y_hat = _cells(y), _cells(y_hat)
    peak = 0
    for i, v in enumerate(y):
        if v > y[peak]:
            peak = i
    mean, std = _oracle_moments(y_hat)
    return (y_hat[peak] - mean) / std


def test_metrics_match_naive_oracles():
    rng = np.random.RandomState(0)
    for _ in range(1000):
        g = rng.uniform(0, 1, size=(16, 16))
        p = rng.uniform(0, 1, size=(16, 16))
        assert kld(g, p) == pytest.approx(_oracle_kld(g, p), abs=1e-9)
        assert cc(g, p) == pytest.approx(_oracle_cc(g, p), abs=1e-9)
        assert sim(g, p) == pytest.approx(_oracle_sim(g, p), abs=1e-9)
        assert nss(g, p) == pytest.approx(_oracle_nss(g, p), abs=1e-9)


def test_metric_identities():
    rng = np.random.RandomState(1)
    for _ in range(1000):
        g = rng.uniform(0, 1, size=(16, 16)) ** 3
        p = rng.uniform(0, 1, size=(16, 16))
        a, b = rng.uniform(0.1, 10.), rng.uniform(-5., 5.)
        assert kld(g, g) <= 1e-5
        assert kld(g, p) >= -1e-9
        assert abs(cc(g, a * p + b) - cc(g, p)) <= 1e-6
        assert abs(nss(g, a * p + b) - nss(g, p)) <= 1e-6
        tiny = 10. ** rng.uniform(-12, -6)
        assert abs(cc(g, tiny * (p + b)) - cc(g, p)) <= 1e-6
        assert abs(nss(g, tiny * (p + b)) - nss(g, p)) <= 1e-6
        assert abs(fdm_cc(g / g.sum(), p / p.sum()) - cc(g, p)) <= 1e-6
        value = sim(g, p)
        assert 0. <= value <= 1.
        assert abs(value - sim(p, g)) <= 1e-9
        pa, pb = g / g.sum(), p / p.sum()
        assert 0. <= fdm_sim(pa, pb) <= 1.
        assert abs(fdm_sim(pa, pb) - fdm_sim(pb, pa)) <= 1e-9


def test_kld_fixtures():
    assert kld([[1., 0.]], [[0.5, 0.5]]) == pytest.approx(math.log(2),
                                                          abs=1e-3)
    delta = np.zeros((16, 16))
    delta[3, 7] = 1.
    assert kld(delta, np.ones((16, 16))) == pytest.approx(math.log(256),
                                                          abs=1e-3)


def test_kld_errors():
    with pytest.raises(DegenerateTargetError):
        kld(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(ShapeError):
        kld(np.ones((2, 2)), np.ones((2, 3)))


def test_kld_uses_configured_eps():
    g, p = [[1., 0.]], [[0.5, 0.5]]
    with config_context(eps=1e-3):
        configured = kld(g, p)
    assert configured == pytest.approx(_oracle_kld(g, p, eps=1e-3))
    assert configured != kld(g, p)


def test_cc_fixtures():
    y = np.array([[1., 0.], [0., 1.]])
    assert cc(y, y) == pytest.approx(1., abs=1e-6)
    assert cc(y, 1 - y) == pytest.approx(-1., abs=1e-6)
    assert cc(SaliencyGrid(y), SaliencyGrid(3 * y + 2)) == pytest.approx(1.)
    with pytest.raises(DegenerateVarianceError):
        cc(y, np.ones((2, 2)))


def test_sim_fixtures():
    p = np.array([[0.5, 0.5], [0., 0.]])
    assert sim(p, np.ones((2, 2))) == pytest.approx(0.5)
    assert sim(p, p) == pytest.approx(1., abs=1e-6)
    assert sim(p, p[::-1]) == 0.
    with pytest.raises(DegenerateDistributionError):
        sim(p, np.zeros((2, 2)))


def test_nss_fixtures():
    y_hat = np.array([[0., 0.], [0., 1.]])
    y = np.array([[0., 0.], [0., 5.]])
    assert nss(y, y_hat) == pytest.approx(0.75 / math.sqrt(0.1875),
                                          abs=1e-3)
    assert nss(y, y_hat) == pytest.approx(1.7321, abs=1e-3)
    with pytest.raises(DegenerateVarianceError):
        nss(y, np.full((2, 2), 0.3))
    with pytest.raises(DegenerateTargetError):
        nss(np.ones((2, 2)), y_hat)


def test_nss_peak_ties_use_first_cell():
    y = np.array([[0., 2.], [2., 0.]])
    y_hat = np.array([[0., 1.], [3., 0.]])
    z = (y_hat - y_hat.mean()) / y_hat.std()
    assert nss(y, y_hat) == pytest.approx(z[0, 1])


def test_fdm_sim_contract():
    a = SaliencyGrid(np.array([[1., 3.]]))
    with pytest.raises(ContractError):
        fdm_sim(a, a.normalized())
    with pytest.raises(ContractError):
        fdm_sim(np.array([[1., 1.]]), np.array([[0.5, 0.5]]))
    assert fdm_sim(a.normalized(), a.normalized()) == pytest.approx(1.)
    assert fdm_sim([[1., 0.]], [[0., 1.]]) == 0.


def _single_fixation_fdm(x, y):
    trace = GazeTrace(t=np.arange(40) / 200., x=np.full(40, float(x)),
                      y=np.full(40, float(y)), valid=np.ones(40, dtype=bool),
                      width=100, height=80)
    return build_fdm(trace, detect_fixations(trace), sigma=5.)


def test_fdm_cc_of_separated_impulses():
    a = _single_fixation_fdm(15, 15)
    b = _single_fixation_fdm(85, 65)
    value = fdm_cc(a, b)
    assert value < 0
    assert value == pytest.approx(_oracle_cc(a.values, b.values), abs=1e-9)
    assert fdm_cc(a, a) == pytest.approx(1., abs=1e-6)
    assert fdm_cc(a, SaliencyGrid(2 * a.values)) == pytest.approx(1.,
                                                                  abs=1e-6)


def test_resize_bilinear_keeps_constant_fields():
    resized = resize_bilinear(np.full((4, 4), 0.3), 7, 3)
    assert resized.shape == (3, 7)
    np.testing.assert_allclose(resized.values, 0.3)
    with pytest.raises(ValueError):
        resize_bilinear(np.ones((2, 2)), 0, 2)


def test_resize_bilinear_half_pixel_centers():
    values = np.arange(8, dtype=np.float64).reshape(2, 4)
    resized = resize_bilinear(values, 2, 1)
    # output pixels sample the input at x = 0.5 and x = 2.5, y = 0.5
    np.testing.assert_allclose(resized.values, [[2.5, 4.5]])


def _linear_field(i, j):
    return (i + 2 * j + 1) / 60.


def test_evaluate_identical_sequences():
    rng = np.random.RandomState(0)
    frames = [SaliencyGrid(rng.uniform(0, 1, size=(12, 16)))
              for _ in range(4)]
    result = evaluate_sequence(frames, frames)
    assert result.summary['cc'] == pytest.approx(1., abs=1e-9)
    assert result.summary['sim'] == pytest.approx(1., abs=1e-9)
    assert result.summary['kld'] <= 1e-5
    assert result.n_frames_used == {'kld': 4, 'cc': 4, 'sim': 4, 'nss': 4}


def test_empty_ground_truth_frames_are_excluded():
    rng = np.random.RandomState(1)
    gt = [rng.uniform(0, 1, size=(8, 8)) for _ in range(3)]
    gt[1] = np.zeros((8, 8))
    pred = [rng.uniform(0, 1, size=(8, 8)) for _ in range(3)]
    result = evaluate_sequence(gt, pred)
    assert not result.frames[1].valid
    assert result.frames[1].kld is None
    assert result.n_frames_used['sim'] == 2
    for metric in ('kld', 'cc', 'sim', 'nss'):
        expected = (getattr(result.frames[0], metric)
                    + getattr(result.frames[2], metric)) / 2
        assert abs(result.summary[metric] - expected) <= 1e-12


def test_undefined_metrics_are_tracked_per_metric():
    gt = [np.eye(4), np.eye(4)]
    pred = [np.full((4, 4), 0.5), np.eye(4) * 0.8]
    result = evaluate_sequence(gt, pred)
    first = result.frames[0]
    assert first.valid
    assert first.cc is None and first.nss is None
    assert first.kld is not None and first.sim is not None
    assert result.n_frames_used == {'kld': 2, 'cc': 1, 'sim': 2, 'nss': 1}
    assert result.summary['cc'] == result.frames[1].cc


def test_predictions_are_clamped_before_scoring():
    gt = np.array([[0., 1.], [0.5, 0.]])
    result = evaluate_sequence([gt], [3 * gt - 0.5])
    clamped = np.clip(3 * gt - 0.5, 0, 1)
    assert result.frames[0].sim == pytest.approx(sim(gt, clamped))
    assert result.frames[0].cc == pytest.approx(cc(gt, clamped))


def test_prediction_at_twice_the_resolution():
    i, j = np.mgrid[:16, :16]
    gt = _linear_field(i, j)
    big_i, big_j = np.mgrid[:32, :32]
    pred = _linear_field((big_i - 0.5) / 2, (big_j - 0.5) / 2)
    result = evaluate_sequence([gt], [pred], pred_native_w=32,
                               pred_native_h=32)
    assert result.frames[0].cc == pytest.approx(1., abs=1e-3)
    np.testing.assert_allclose(resize_bilinear(pred, 16, 16).values, gt,
                               atol=1e-12)


def test_evaluate_sequence_errors():
    with pytest.raises(ShapeError):
        evaluate_sequence([np.ones((2, 2))], [])
    with pytest.raises(ShapeError):
        evaluate_sequence([np.eye(2)], [np.eye(2)], pred_native_w=4,
                          pred_native_h=4)
    with pytest.raises(ValueError):
        evaluate_sequence([np.eye(2)], [np.eye(2)], pred_native_w=2)


def test_parallel_scoring_matches_serial():
    rng = np.random.RandomState(2)
    gt = [rng.uniform(0, 1, size=(8, 8)) for _ in range(6)]
    pred = [rng.uniform(0, 1, size=(8, 8)) for _ in range(6)]
    serial = evaluate_sequence(gt, pred)
    with config_context(n_jobs=2):
        parallel = evaluate_sequence(gt, pred)
    assert parallel.summary == serial.summary


def test_report_layout_and_pooling():
    rng = np.random.RandomState(3)
    first = evaluate_sequence([rng.uniform(size=(4, 4))],
                              [rng.uniform(size=(4, 4))])
    second = evaluate_sequence([np.zeros((4, 4)), rng.uniform(size=(4, 4))],
                               [rng.uniform(size=(4, 4))] * 2)
    report = first.to_dict()
    assert list(report['frames'][0]) == ['i', 'kld', 'cc', 'sim', 'nss',
                                         'valid_kld', 'valid_cc',
                                         'valid_sim', 'valid_nss']
    assert report['summary']['n_frames_used_per_metric']['cc'] == 1

    pooled = combine_evaluations([first, second])
    assert pooled.n_frames_used['sim'] == 2
    assert pooled.summary['sim'] == pytest.approx(
        (first.frames[0].sim + second.frames[1].sim) / 2)
