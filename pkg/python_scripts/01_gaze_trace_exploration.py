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
# # Exploring a gaze trace
#
# In this notebook, we will look at the steps required before any gaze
# analysis takes place.
# * load a gaze recording and check its quality
# * detect fixations with a dispersion threshold
# * summarize the recording with duration-normalized fixation metrics
#
# ## Generating a recording
#
# Real recordings are not shipped with gazekit. We generate a synthetic one
# instead: a few stationary fixations separated by linear saccades, sampled at
# 200 Hz on a 1280x1024 stimulus. The generating fixations are returned as
# well, so we can check what the detector finds.

# %%
import numpy as np
import pandas as pd

from gazekit.synth import SynthSpec, synth_trace

spec = SynthSpec(seed=0, n_fixations=6, jitter_sigma=2.)
trace, generated = synth_trace(spec)
len(trace)

# %% [markdown]
# A trace is a set of aligned columns. Pandas is handy to look at them.

# %%
samples = pd.DataFrame({'t': trace.t, 'x': trace.x, 'y': trace.y,
                        'valid': trace.valid})
samples.head()

# %%
samples.describe()

# %% [markdown]
# ## Reading and writing the CSV format
#
# Gaze logs are CSV files with a `t,x,y,valid` header. Writing a trace and
# parsing it back gives the same samples.

# %%
from gazekit.trace import parse_gaze_csv, validate_trace, write_gaze_csv

text = write_gaze_csv(trace)
print(text[:120])

# %%
parsed = parse_gaze_csv(text, width=1280, height=1024)
np.array_equal(parsed.x, trace.x)

# %% [markdown]
# Eye trackers lose the eye during blinks. Such samples are flagged invalid
# and their coordinates may be missing. Out-of-frame samples are clamped to
# the stimulus and counted.

# %%
lines = text.splitlines()
# line 0 is the header
row = generated[1].start_index + 20
lines[row + 1] = lines[row + 1].split(',')[0] + ',,,0'
lines[row + 2] = lines[row + 2].split(',')[0] + ',1500,-20,1'
recording = parse_gaze_csv('\n'.join(lines), width=1280, height=1024,
                           nominal_rate=200.)
validate_trace(recording).to_dict()

# %% [markdown]
# ## Detecting fixations
#
# A fixation is a maximal run of valid samples lasting at least `t_min`
# seconds whose dispersion `(max x - min x) + (max y - min y)` stays below
# `d_max` pixels.

# %%
from gazekit.fixation import detect_fixations, segments_to_records

segments = detect_fixations(trace, t_min=0.1, d_max=50.)
pd.DataFrame(segments_to_records(segments))

# %% [markdown]
# The detector recovers the generating fixations: it may only trim a few
# jittered samples at their borders.

# %%
[(found.start_index - truth.start_index, truth.end_index - found.end_index)
 for found, truth in zip(segments, generated)]

# %% [markdown]
# The blink closes the second fixation, which the detector now reports as
# two shorter ones when both parts last long enough.

# %%
len(detect_fixations(recording)), len(segments)

# %% [markdown]
# ## Fixation metrics
#
# Metrics are normalized by the duration of the recording so that trials of
# different length can be compared. The area of the convex hull of all the
# valid gaze points tells how widely the gaze explored the stimulus.

# %%
from gazekit.fixation import summarize
from gazekit.spatial import gaze_hull

hull = gaze_hull(trace)
metrics = summarize(trace, segments).with_hull_area(hull.area)
metrics.to_dict()

# %% [markdown]
# Lowering the dispersion threshold below the jitter of the samples breaks
# the fixations apart.

# %%
thresholds = [5., 10., 20., 50.]
pd.Series([len(detect_fixations(trace, d_max=d_max)) for d_max in thresholds],
          index=pd.Index(thresholds, name='d_max'), name='n_fixations')
