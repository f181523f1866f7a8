"""
Demonstration ranking, viewing-subset allocation and leakage-safe
train/validation/test splits with the IA/IP/NA/NP training conditions.

A *content unit* is an active demonstration together with every passive
viewing of its video. Units are never divided across splits.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np
import pandas as pd
from sklearn.utils import check_random_state

from .exceptions import (ContractError, DanglingReferenceError,
                         EmptyInputError, QuotaError, SelfViewingError)
from .trace import Expertise, Modality, Task

logger = logging.getLogger(__name__)

ZERO_STD = 1e-12
FRACTION_TOL = 1e-9


class Split(str, Enum):
    TRAIN = 'train'
    VAL = 'val'
    TEST = 'test'


class Condition(str, Enum):
    """Training conditions: gaze-source expertise crossed with modality."""
    IA = 'IA'
    IP = 'IP'
    NA = 'NA'
    NP = 'NP'


_CONDITIONS = {
    (Expertise.INTERMEDIATE, Modality.ACTIVE): Condition.IA,
    (Expertise.INTERMEDIATE, Modality.PASSIVE): Condition.IP,
    (Expertise.NOVICE, Modality.ACTIVE): Condition.NA,
    (Expertise.NOVICE, Modality.PASSIVE): Condition.NP,
}


@dataclass(frozen=True)
class PerfFeatures:
    score: float
    penalty: float
    time: float
    task: Task

    def __post_init__(self):
        object.__setattr__(self, 'task', Task(self.task))
        for name in ('score', 'penalty', 'time'):
            if not np.isfinite(getattr(self, name)):
                raise ContractError(f"{name} must be finite")

    @classmethod
    def from_trial(cls, trial):
        return cls(score=trial.score, penalty=trial.penalty,
                   time=trial.completion_time, task=trial.task)


def _task_key(task):
    return task.value if isinstance(task, Enum) else str(task)


def zscore_per_task(values, tasks):
    """Z-normalize values within each task group.

    Uses the population standard deviation; a group whose standard
    deviation is below 1e-12 (a single value, identical values) maps to 0.

    Parameters
    ----------
    values : array-like of shape (n_values,)

    tasks : array-like of shape (n_values,)
        Group label of every value.

    Returns
    -------
    z : ndarray of shape (n_values,)

    Examples
    --------
    >>> zscore_per_task([90, 70, 5], ['A', 'A', 'B'])
    array([ 1., -1.,  0.])
    """
    values = np.asarray(values, dtype=np.float64)
    tasks = [_task_key(task) for task in tasks]
    if values.ndim != 1 or values.shape[0] != len(tasks):
        raise ValueError(
            f"values and tasks must be 1-D of the same length, got "
            f"{values.shape} and {len(tasks)}")
    if values.shape[0] == 0:
        raise ValueError("cannot z-normalize an empty group")

    frame = pd.DataFrame({'task': tasks, 'value': values})
    grouped = frame.groupby('task', sort=False)['value']
    centered = frame['value'] - grouped.transform('mean')
    std = np.sqrt(centered.pow(2).groupby(frame['task'])
                  .transform('mean')).to_numpy()
    centered = centered.to_numpy()
    z = np.zeros_like(values)
    spread = std >= ZERO_STD
    z[spread] = centered[spread] / std[spread]
    return z


def perf_index(features):
    """Performance index ``z(score) - z(penalty) - z(time)`` of each
    demonstration, z-normalized per task.

    Parameters
    ----------
    features : list of PerfFeatures

    Returns
    -------
    index : ndarray of shape (n_demonstrations,)
    """
    if not features:
        raise ValueError("no demonstration to index")
    tasks = [feature.task for feature in features]
    score = zscore_per_task([f.score for f in features], tasks)
    penalty = zscore_per_task([f.penalty for f in features], tasks)
    time = zscore_per_task([f.time for f in features], tasks)
    return score - penalty - time


def rank_demonstrations(trials, expertise=None, index=None):
    """Order the demonstrations of one task and one expertise level.

    Novice demonstrations come in ascending order of performance index
    (worst first), intermediate ones in descending order. Ties go to the
    smaller ``trial_order``, then to the smaller ``trial_id``.

    Parameters
    ----------
    trials : list of TrialRecord
        Active trials sharing task and expertise.

    expertise : {'novice', 'intermediate'}, default=None
        Checked against the trials when given.

    index : dict of str to float, default=None
        Precomputed performance index by trial id. By default it is
        computed over ``trials`` alone.

    Returns
    -------
    ranked : list of str
        Trial ids.
    """
    trials = list(trials)
    if not trials:
        return []
    tasks = {trial.task for trial in trials}
    levels = {trial.expertise for trial in trials}
    if len(tasks) > 1 or len(levels) > 1:
        raise ValueError(
            f"demonstrations to rank must share task and expertise, got "
            f"tasks {sorted(t.value for t in tasks)} and expertise "
            f"{sorted(e.value for e in levels)}")
    level = levels.pop()
    if expertise is not None and Expertise(expertise) is not level:
        raise ValueError(
            f"expected {Expertise(expertise).value} demonstrations, got "
            f"{level.value}")
    if index is None:
        values = perf_index([PerfFeatures.from_trial(t) for t in trials])
        index = dict(zip((t.trial_id for t in trials), values))

    sign = 1. if level is Expertise.NOVICE else -1.
    ordered = sorted(trials, key=lambda t: (sign * index[t.trial_id],
                                            t.trial_order, t.trial_id))
    return [trial.trial_id for trial in ordered]


def allocate_viewing_subsets(ranked, per_task_quota, participants):
    """Select one demonstration per participant following the ranking.

    Parameters
    ----------
    ranked : list of str
        Trial ids as returned by :func:`rank_demonstrations`.

    per_task_quota : int
        Number of demonstrations to select.

    participants : dict of str to str
        Participant id of every ranked trial.

    Returns
    -------
    selected : list of str
        Trial ids in rank order, at most one per participant.
    """
    if per_task_quota < 1:
        raise ValueError(
            f"per_task_quota must be >= 1, got {per_task_quota!r}")
    n_participants = len({participants[trial_id] for trial_id in ranked})
    if per_task_quota > n_participants:
        shortfall = per_task_quota - n_participants
        raise QuotaError(
            f"quota of {per_task_quota} demonstrations but only "
            f"{n_participants} participants, {shortfall} short", shortfall)

    selected, seen = [], set()
    for trial_id in ranked:
        participant = participants[trial_id]
        if participant in seen:
            continue
        seen.add(participant)
        selected.append(trial_id)
        if len(selected) == per_task_quota:
            break
    return selected


@dataclass(frozen=True)
class RankedGroup:
    task: Task
    expertise: Expertise
    ranked: Tuple[str, ...]
    allocated: Tuple[str, ...]


def active_perf_index(trials):
    """Performance index of every active trial, z-normalized over all the
    active demonstrations of its task."""
    active = [trial for trial in trials
              if trial.modality is Modality.ACTIVE]
    if not active:
        raise EmptyInputError("no active demonstration")
    values = perf_index([PerfFeatures.from_trial(t) for t in active])
    return {trial.trial_id: float(value)
            for trial, value in zip(active, values)}


def rank_and_allocate(trials, quotas=None):
    """Rank and allocate the active demonstrations of every task and
    expertise level.

    Parameters
    ----------
    trials : list of TrialRecord

    quotas : dict of Expertise to int, default=None
        Per-task quota of each expertise level. A missing level takes one
        demonstration from every participant.

    Returns
    -------
    groups : list of RankedGroup
        Sorted by task, then expertise.
    """
    quotas = {Expertise(k): v for k, v in (quotas or {}).items()}
    index = active_perf_index(trials)
    by_group = defaultdict(list)
    for trial in trials:
        if trial.modality is Modality.ACTIVE:
            by_group[trial.task, trial.expertise].append(trial)

    groups = []
    for task, level in sorted(by_group,
                              key=lambda k: (k[0].value, k[1].value)):
        members = by_group[task, level]
        ranked = rank_demonstrations(members, level, index=index)
        participants = {t.trial_id: t.participant_id for t in members}
        quota = quotas.get(level, len(set(participants.values())))
        allocated = allocate_viewing_subsets(ranked, quota, participants)
        logger.info("task %s, %s: %d ranked, %d allocated", task.value,
                    level.value, len(ranked), len(allocated))
        groups.append(RankedGroup(task=task, expertise=level,
                                  ranked=tuple(ranked),
                                  allocated=tuple(allocated)))
    return groups


def _by_id(trials):
    by_id = {}
    for trial in trials:
        if trial.trial_id in by_id:
            raise ContractError(f"duplicated trial id {trial.trial_id!r}")
        by_id[trial.trial_id] = trial
    return by_id


def _check_sources(by_id):
    dangling = sorted(
        trial.trial_id for trial in by_id.values()
        if trial.modality is Modality.PASSIVE
        and (trial.source_trial_id not in by_id
             or by_id[trial.source_trial_id].modality
             is not Modality.ACTIVE))
    if dangling:
        raise DanglingReferenceError(
            f"passive trials {dangling} do not reference a known active "
            f"trial")


def check_viewing_schedule(trials):
    """Check that no observer watched their own demonstration.

    Raises :class:`SelfViewingError` naming the offending passive trials,
    :class:`DanglingReferenceError` for unknown sources.
    """
    by_id = _by_id(trials)
    _check_sources(by_id)
    offending = sorted(
        trial.trial_id for trial in by_id.values()
        if trial.modality is Modality.PASSIVE
        and by_id[trial.source_trial_id].participant_id
        == trial.participant_id)
    if offending:
        raise SelfViewingError(
            f"passive trials {offending} show observers their own "
            f"demonstration")


def _split_counts(n_units, fractions):
    """Units per split by largest remainder; with 3 units or more every
    split gets at least one."""
    if n_units == 1:
        return [1, 0, 0]
    raw = np.asarray(fractions) * n_units
    counts = np.floor(raw).astype(int)
    remainder = raw - counts
    for position in np.argsort(-remainder, kind='stable')[
            :n_units - counts.sum()]:
        counts[position] += 1
    if n_units >= 3:
        while (counts == 0).any():
            counts[int(np.argmax(counts))] -= 1
            counts[int(np.flatnonzero(counts == 0)[0])] += 1
    return counts.tolist()


def _check_fractions(fractions):
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3:
        raise ValueError(
            f"fractions must be (train, val, test), got {fractions}")
    if not all(f > 0 for f in fractions):
        raise ValueError(f"fractions must be positive, got {fractions}")
    if abs(sum(fractions) - 1.) > FRACTION_TOL:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)!r}")
    return fractions


@dataclass(frozen=True)
class SplitAssignment:
    """Split of every content unit and of the trials it holds.

    Attributes
    ----------
    seed : int

    fractions : tuple of float
        Train, validation and test fractions.

    unit_splits : dict of str to Split
        Keyed by the active trial id of the unit.

    unit_members : dict of str to tuple of str
        Active trial id first, then the passive trial ids in sorted order.

    trials : dict of str to TrialRecord
    """
    seed: int
    fractions: Tuple[float, float, float]
    unit_splits: Dict[str, Split]
    unit_members: Dict[str, Tuple[str, ...]]
    trials: Dict[str, object]

    def unit_of(self, trial_id):
        trial = self.trials[trial_id]
        if trial.modality is Modality.PASSIVE:
            return trial.source_trial_id
        return trial_id

    def split_of(self, trial_id):
        return self.unit_splits[self.unit_of(trial_id)]

    def trial_ids(self, split):
        split = Split(split)
        return [trial_id for unit_id, members in self.unit_members.items()
                if self.unit_splits[unit_id] is split
                for trial_id in members]

    def condition_of(self, trial_id):
        """Training condition of the annotation recorded in a trial."""
        trial = self.trials[trial_id]
        return _CONDITIONS[trial.expertise, trial.modality]

    def demo_expertise_of(self, trial_id):
        return self.trials[self.unit_of(trial_id)].expertise


def build_splits(trials, fractions=(0.6, 0.2, 0.2), seed=0):
    """Assign content units to train, validation and test splits.

    Units are grouped by task; within each task (in sorted order) the
    sorted unit ids are permuted with a generator seeded by ``seed`` and
    cut according to ``fractions``, so every task contributes to every
    split where it has enough units.

    Parameters
    ----------
    trials : list of TrialRecord

    fractions : tuple of float, default=(0.6, 0.2, 0.2)
        Positive train, validation and test fractions summing to 1.

    seed : int, default=0

    Returns
    -------
    assignment : SplitAssignment
    """
    fractions = _check_fractions(fractions)
    by_id = _by_id(trials)
    if not by_id:
        raise EmptyInputError("no trial to split")
    _check_sources(by_id)

    passive_of = defaultdict(list)
    for trial in by_id.values():
        if trial.modality is Modality.PASSIVE:
            passive_of[trial.source_trial_id].append(trial.trial_id)
    units_by_task = defaultdict(list)
    for trial in by_id.values():
        if trial.modality is Modality.ACTIVE:
            units_by_task[trial.task.value].append(trial.trial_id)

    rng = check_random_state(seed)
    unit_splits = {}
    for task in sorted(units_by_task):
        unit_ids = sorted(units_by_task[task])
        order = rng.permutation(len(unit_ids))
        counts = _split_counts(len(unit_ids), fractions)
        bounds = np.cumsum([0] + counts)
        for split, start, stop in zip(Split, bounds[:-1], bounds[1:]):
            for position in order[start:stop]:
                unit_splits[unit_ids[position]] = split
        logger.debug("task %s: %s units per split", task, counts)

    unit_splits = dict(sorted(unit_splits.items()))
    unit_members = {
        unit_id: (unit_id,) + tuple(sorted(passive_of[unit_id]))
        for unit_id in unit_splits}
    return SplitAssignment(seed=seed, fractions=fractions,
                           unit_splits=unit_splits,
                           unit_members=unit_members, trials=by_id)


def filter_condition(assignment, condition, split=None, demo_expertise=None,
                     task=None):
    """Annotations of a training condition.

    Parameters
    ----------
    assignment : SplitAssignment

    condition : {'IA', 'IP', 'NA', 'NP'}

    split : {'train', 'val', 'test'}, default=None
        All splits when None.

    demo_expertise : {'novice', 'intermediate'}, default=None
        Keep only annotations of demonstrations of this expertise.

    task : {'A', 'B', 'C', 'D'}, default=None

    Returns
    -------
    pairs : list of (str, str)
        ``(demonstration trial id, annotation trial id)``, in unit order.
    """
    condition = Condition(condition)
    split = None if split is None else Split(split)
    demo_expertise = (None if demo_expertise is None
                      else Expertise(demo_expertise))
    task = None if task is None else Task(task)

    pairs = []
    for unit_id, members in assignment.unit_members.items():
        demo = assignment.trials[unit_id]
        if split is not None and assignment.unit_splits[unit_id] is not split:
            continue
        if demo_expertise is not None and demo.expertise is not demo_expertise:
            continue
        if task is not None and demo.task is not task:
            continue
        pairs.extend((unit_id, trial_id) for trial_id in members
                     if assignment.condition_of(trial_id) is condition)
    return pairs


def split_manifest(assignment):
    """JSON-ready description of a split assignment."""
    return {
        'seed': assignment.seed,
        'fractions': list(assignment.fractions),
        'units': [{'unit_id': unit_id, 'split': split.value,
                   'trial_ids': list(assignment.unit_members[unit_id])}
                  for unit_id, split in assignment.unit_splits.items()],
        'conditions': {
            condition.value: [
                {'demonstration': demo, 'annotation': annotation,
                 'split': assignment.split_of(annotation).value}
                for demo, annotation in filter_condition(assignment,
                                                         condition)]
            for condition in Condition},
    }


def split_summary(assignment):
    """Number of annotations per condition and split, as a DataFrame."""
    rows = [{'condition': assignment.condition_of(trial_id).value,
             'split': split.value}
            for split in Split for trial_id in assignment.trial_ids(split)]
    frame = pd.DataFrame(rows, columns=['condition', 'split'])
    return (frame.groupby(['condition', 'split']).size()
            .unstack(fill_value=0)
            .reindex(index=[c.value for c in Condition],
                     columns=[s.value for s in Split], fill_value=0))
