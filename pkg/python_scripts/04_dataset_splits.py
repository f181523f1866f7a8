# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#       jupytext_version: 1.5.0
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Curating a gaze dataset
#
# In this notebook, we prepare the trials of a gaze study for training
# saliency models:
# * rank the task demonstrations with a performance index
# * select which demonstrations observers will watch
# * split the trials into train, validation and test sets without leaking a
#   video across sets
# * select the annotations of a training condition
#
# ## The trial manifest
#
# Participants perform tasks (active trials) and watch recordings of other
# participants performing them (passive trials). We make up a small study.

# %%
import pandas as pd
from sklearn.utils import check_random_state

from gazekit.trace import TrialRecord

rng = check_random_state(0)
expertise = {'p0': 'intermediate', 'p1': 'intermediate', 'p2': 'intermediate',
             'p3': 'novice', 'p4': 'novice', 'p5': 'novice'}

trials = []
for task in 'ABCD':
    for participant, level in expertise.items():
        trial_id = f'{participant}-{task}'
        trials.append(TrialRecord(
            trial_id=trial_id, participant_id=participant, expertise=level,
            modality='active', task=task, score=rng.uniform(40, 100),
            penalty=float(rng.randint(0, 5)),
            completion_time=rng.uniform(60, 300), trial_order=len(trials)))
        others = [p for p in expertise if p != participant]
        for observer in rng.choice(others, size=2, replace=False):
            trials.append(TrialRecord(
                trial_id=f'{observer}-views-{trial_id}',
                participant_id=observer, expertise=expertise[observer],
                modality='passive', task=task, source_trial_id=trial_id))

manifest = pd.DataFrame([trial.to_dict() for trial in trials])
manifest.head()

# %%
manifest.groupby(['modality', 'expertise']).size()

# %% [markdown]
# ## Performance index
#
# Scores, penalties and completion times are z-normalized within each task
# and combined as `z(score) - z(penalty) - z(time)`.

# %%
from gazekit.dataset import active_perf_index

index = pd.Series(active_perf_index(trials), name='perf_index')
index.sort_values().head()

# %% [markdown]
# ## Ranking and allocation
#
# Novice demonstrations are ranked worst first, intermediate ones best first.
# Observers then watch the top of each ranking, at most one demonstration
# per participant.

# %%
from gazekit.dataset import rank_and_allocate

groups = rank_and_allocate(trials, quotas={'novice': 2, 'intermediate': 2})
pd.DataFrame([{'task': group.task.value,
               'expertise': group.expertise.value,
               'ranked': group.ranked, 'allocated': group.allocated}
              for group in groups])

# %% [markdown]
# Asking for more demonstrations than there are participants fails with the
# shortfall.

# %%
from gazekit.exceptions import QuotaError

try:
    rank_and_allocate(trials, quotas={'novice': 5})
except QuotaError as exc:
    print(exc, exc.shortfall)

# %% [markdown]
# ## Leakage-free splits
#
# A demonstration and every viewing of its video form a content unit.
# Units are shuffled within each task and cut 60/20/20, so the same video
# never appears in two splits.

# %%
from gazekit.dataset import build_splits, check_viewing_schedule, split_summary

check_viewing_schedule(trials)
assignment = build_splits(trials, fractions=(0.6, 0.2, 0.2), seed=0)
split_summary(assignment)

# %%
leaks = [trial.trial_id for trial in trials
         if trial.source_trial_id is not None
         and assignment.split_of(trial.trial_id)
         is not assignment.split_of(trial.source_trial_id)]
leaks

# %% [markdown]
# ## Training conditions
#
# IA, IP, NA and NP cross the expertise of the observer with the modality
# of the gaze. The test subsets can further be restricted to the expertise
# of the demonstration that was watched.

# %%
from gazekit.dataset import filter_condition

pd.DataFrame(filter_condition(assignment, 'IP', split='test',
                              demo_expertise='novice'),
             columns=['demonstration', 'annotation'])

# %% [markdown]
# The manifest of the assignment is what the command line writes to disk.

# %%
from gazekit.dataset import split_manifest
from gazekit.formats import dump_json

print(dump_json(split_manifest(assignment))[:300])
