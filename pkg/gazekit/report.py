"""
Group analysis of fixation metrics: tables per trial, summaries per
condition and the overlap between passive and active fixation density maps.
"""
import logging

import numpy as np
import pandas as pd

from .exceptions import DegenerateError, EmptyInputError
from .metrics import fdm_cc, fdm_sim
from .trace import Expertise, Modality

logger = logging.getLogger(__name__)

# Active annotations, then passive ones split by the expertise of the
# demonstration that was watched.
CONDITION_LABELS = ('IA', 'NA', 'IP-I', 'IP-N', 'NP-I', 'NP-N')

SUMMARY_COLUMNS = ('fixation_rate', 'scanpath_speed', 'ratio', 'hull_area',
                   'hull_area_per_s')


def _letter(expertise):
    return 'I' if expertise is Expertise.INTERMEDIATE else 'N'


def condition_label(trial, trials):
    """Label of a trial among :data:`CONDITION_LABELS`.

    Parameters
    ----------
    trial : TrialRecord

    trials : dict of str to TrialRecord
        Used to look up the source of a passive trial.
    """
    if trial.modality is Modality.ACTIVE:
        return _letter(trial.expertise) + 'A'
    source = trials[trial.source_trial_id]
    return f"{_letter(trial.expertise)}P-{_letter(source.expertise)}"


def metrics_frame(metrics_by_trial):
    """One row of fixation metrics per trial.

    Parameters
    ----------
    metrics_by_trial : dict of str to FixationMetrics

    Returns
    -------
    frame : pandas.DataFrame
        Indexed by ``trial_id``; undefined values are NaN.
    """
    rows = []
    for trial_id, metrics in metrics_by_trial.items():
        stats = metrics.duration_stats
        rows.append({
            'trial_id': trial_id,
            'n_fix': metrics.n_fix,
            't_fix': metrics.t_fix,
            't_total': metrics.t_total,
            'ratio': metrics.ratio,
            'scanpath_length': metrics.scanpath_length,
            'scanpath_speed': metrics.scanpath_speed,
            'fixation_rate': metrics.fixation_rate,
            'duration_mean': stats.mean if stats else None,
            'duration_median': stats.median if stats else None,
            'duration_std': stats.std if stats else None,
            'hull_area': metrics.hull_area,
            'hull_area_per_s': metrics.hull_area_per_s,
        })
    if not rows:
        raise EmptyInputError("no trial metrics to tabulate")
    frame = pd.DataFrame(rows).set_index('trial_id')
    return frame.astype({column: float for column in frame.columns
                         if column != 'n_fix'})


def condition_summary(frame, trials):
    """Mean, median and population standard deviation of the main metrics
    per condition label.

    Parameters
    ----------
    frame : pandas.DataFrame
        As returned by :func:`metrics_frame`.

    trials : dict of str to TrialRecord

    Returns
    -------
    summary : pandas.DataFrame
        One row per condition label present in ``frame``, columns indexed
        by ``(metric, statistic)``.
    """
    labels = pd.Series({trial_id: condition_label(trials[trial_id], trials)
                        for trial_id in frame.index}, name='condition')
    grouped = frame[list(SUMMARY_COLUMNS)].groupby(labels)
    summary = pd.concat({'mean': grouped.mean(),
                         'median': grouped.median(),
                         'std': grouped.std(ddof=0)}, axis=1)
    summary = summary.swaplevel(axis=1)[
        [(column, stat) for column in SUMMARY_COLUMNS
         for stat in ('mean', 'median', 'std')]]
    present = [label for label in CONDITION_LABELS if label in summary.index]
    return summary.loc[present]


def summary_records(summary):
    """Nested ``{label: {metric: {statistic: value}}}`` view of a
    condition summary."""
    records = {}
    for label, row in summary.iterrows():
        records[label] = {
            column: {stat: float(row[column, stat])
                     for stat in ('mean', 'median', 'std')}
            for column in SUMMARY_COLUMNS}
    return records


def passive_active_overlap(fdms, trials):
    """FDM-SIM and FDM-CC of every passive fixation density map against
    the map of the demonstration it watched.

    Parameters
    ----------
    fdms : dict of str to SaliencyGrid
        Unnormalized maps by trial id, on a common grid.

    trials : dict of str to TrialRecord

    Returns
    -------
    overlap : pandas.DataFrame
        Indexed by the passive ``trial_id``. Pairs where a score is
        undefined hold NaN.
    """
    rows = []
    for trial_id, fdm in fdms.items():
        trial = trials[trial_id]
        if trial.modality is not Modality.PASSIVE:
            continue
        source = fdms.get(trial.source_trial_id)
        if source is None:
            logger.warning("no fixation density map for %s, the source of %s",
                           trial.source_trial_id, trial_id)
            continue
        if fdm.values.shape != source.values.shape:
            logger.warning("%s skipped: grid %s differs from %s of %s",
                           trial_id, fdm.values.shape, source.values.shape,
                           trial.source_trial_id)
            continue
        row = {'trial_id': trial_id, 'source_trial_id': trial.source_trial_id,
               'condition': condition_label(trial, trials),
               'fdm_sim': np.nan, 'fdm_cc': np.nan}
        try:
            row['fdm_sim'] = fdm_sim(fdm.normalized(), source.normalized())
        except DegenerateError as exc:
            logger.warning("%s: FDM-SIM undefined (%s)", trial_id, exc)
        try:
            row['fdm_cc'] = fdm_cc(fdm, source)
        except DegenerateError as exc:
            logger.warning("%s: FDM-CC undefined (%s)", trial_id, exc)
        rows.append(row)
    columns = ['trial_id', 'source_trial_id', 'condition', 'fdm_sim',
               'fdm_cc']
    return pd.DataFrame(rows, columns=columns).set_index('trial_id')
