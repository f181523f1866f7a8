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
# # Evaluating saliency predictions
#
# In this notebook, we score predicted saliency frames against gaze
# heatmaps with four metrics:
# * KLD, the Kullback-Leibler divergence (lower is better)
# * CC, the Pearson correlation (higher is better)
# * SIM, the histogram intersection (higher is better)
# * NSS, the z-scored prediction read at the gaze peak (higher is better)
#
# We compare a few simple predictors rather than a trained model.

# %%
import numpy as np
import pandas as pd

from gazekit.spatial import gaze_heatmap_sequence
from gazekit.synth import SynthSpec, synth_trace

trace, _ = synth_trace(SynthSpec(seed=3, n_fixations=8, jitter_sigma=2.))
ground_truth = gaze_heatmap_sequence(trace, fps=30.)
len(ground_truth)

# %% [markdown]
# ## Single maps
#
# The metrics accept grids as well as plain arrays.

# %%
from gazekit.metrics import cc, kld, nss, sim

target = ground_truth[10]
blurred = target.values + 0.05
{'kld': kld(target, blurred), 'cc': cc(target, blurred),
 'sim': sim(target, blurred), 'nss': nss(target, blurred)}

# %% [markdown]
# ## Whole sequences
#
# `evaluate_sequence` clamps the predictions to [0, 1], resizes them to the
# ground-truth grid and averages every metric over the frames where it is
# defined. Frames without gaze are left out.
#
# Our predictors:
# * the ground truth itself, the best possible score
# * the ground truth of the previous frame, a model lagging by one frame
# * a centered Gaussian, the classic center-bias baseline, predicted at
#   twice the resolution of the labels

# %%
from gazekit.metrics import evaluate_sequence
from gazekit.spatial import gaze_heatmap_frame

center = gaze_heatmap_frame(159.5, 127.5, 320, 256, sigma=60.)
predictors = {
    'ground truth': ground_truth,
    'previous frame': ground_truth[:1] + ground_truth[:-1],
    'center bias': [center] * len(ground_truth),
}
results = {name: evaluate_sequence(ground_truth, frames)
           for name, frames in predictors.items()}
pd.DataFrame({name: result.summary for name, result in results.items()}).T

# %% [markdown]
# The per-frame scores show where a predictor fails. A frame with an empty
# ground truth is marked invalid and has no score.

# %%
frame_scores = pd.DataFrame(
    [frame.to_dict() for frame in results['previous frame'].frames])
frame_scores.set_index('i').head(10)

# %% [markdown]
# A uniform prediction has no variance: CC and NSS are undefined on every
# frame, while KLD and SIM still apply.

# %%
uniform = [np.full((128, 160), 0.5)] * len(ground_truth)
result = evaluate_sequence(ground_truth, uniform)
result.summary, result.n_frames_used

# %% [markdown]
# ## Pooling videos
#
# The scores of several videos are pooled frame by frame, so long videos
# weigh more than short ones.

# %%
from gazekit.metrics import combine_evaluations

short_trace, _ = synth_trace(SynthSpec(seed=4, n_fixations=2))
short = gaze_heatmap_sequence(short_trace, fps=30.)
pooled = combine_evaluations([
    results['center bias'],
    evaluate_sequence(short, [center] * len(short)),
])
pooled.summary
