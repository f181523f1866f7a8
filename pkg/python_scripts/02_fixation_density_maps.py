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
# # Heatmaps and fixation density maps
#
# In this notebook, we turn gaze into spatial maps:
# * per-frame gaze heatmaps, the targets a saliency model learns from
# * fixation density maps (FDM), one map per recording
# * the overlap of two FDM, measured with FDM-SIM and FDM-CC

# %%
import numpy as np
import pandas as pd

from gazekit.fixation import detect_fixations
from gazekit.synth import SynthSpec, synth_trace

trace, _ = synth_trace(SynthSpec(seed=1, n_fixations=5, jitter_sigma=2.))

# %% [markdown]
# ## Per-frame heatmaps
#
# The recording is cut into video frames at 30 frames per second. Each frame
# gets a Gaussian bump (sigma of 5 pixels, truncated at 3 sigma) at the mean
# gaze position of the frame, on the 160x128 label grid.

# %%
from gazekit.spatial import gaze_heatmap_sequence

frames = gaze_heatmap_sequence(trace, fps=30.)
len(frames), frames[0].shape

# %%
peaks = [np.unravel_index(np.argmax(frame.values), frame.shape)
         for frame in frames]
pd.DataFrame(peaks, columns=['row', 'column']).head()

# %% [markdown]
# ## Fixation density maps
#
# Each fixation adds its duration at its position, then the impulses are
# smoothed with a Gaussian of 30 pixels. The normalized map is a probability
# distribution over the pixels.

# %%
from gazekit.spatial import build_fdm

segments = detect_fixations(trace)
fdm = build_fdm(trace, segments)
fdm.total(), sum(segment.duration for segment in segments)

# %%
probability = fdm.normalized()
probability.probability, probability.total()

# %% [markdown]
# Maps can be computed directly on a coarser grid. Positions are rescaled and
# sigma is then expressed in pixels of that grid.

# %%
small = build_fdm(trace, segments, sigma=30. / 8, grid_shape=(160, 128))
small.shape

# %% [markdown]
# ## Comparing two recordings
#
# FDM-SIM sums the pointwise minimum of two probability maps, FDM-CC is the
# Pearson correlation of the raw maps. A recording compared with itself
# scores 1 on both.

# %%
from gazekit.metrics import fdm_cc, fdm_sim

other, _ = synth_trace(SynthSpec(seed=2, n_fixations=5, jitter_sigma=2.))
other_fdm = build_fdm(other, detect_fixations(other))

pd.DataFrame({
    'fdm_sim': [fdm_sim(probability, probability),
                fdm_sim(probability, other_fdm.normalized())],
    'fdm_cc': [fdm_cc(fdm, fdm), fdm_cc(fdm, other_fdm)],
}, index=['same recording', 'other recording'])

# %% [markdown]
# FDM-SIM refuses maps that are not distributions: normalizing is an
# explicit step.

# %%
from gazekit.exceptions import ContractError

try:
    fdm_sim(fdm, other_fdm)
except ContractError as exc:
    print(exc)

# %% [markdown]
# ## Saving maps
#
# Maps are stored as SGM files (a small header and float32 values) and can
# be exported to 8-bit PGM images for a quick look.

# %%
import tempfile
from pathlib import Path

from gazekit.formats import read_sgm, write_pgm, write_sgm

with tempfile.TemporaryDirectory() as folder:
    write_sgm(small, Path(folder) / "fdm.sgm")
    write_pgm(small, Path(folder) / "fdm.pgm")
    restored = read_sgm(Path(folder) / "fdm.sgm")
np.abs(restored.values - small.values).max()
