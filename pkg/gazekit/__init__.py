"""
gazekit: gaze-trace analytics and saliency evaluation.

Fixation detection, gaze heatmaps and fixation density maps, saliency
metrics and the curation of expertise/modality conditioned datasets.
"""
import logging

from ._config import config_context, get_config, set_config

logger = logging.getLogger(__name__)

__version__ = '0.1.0'

__all__ = ['config_context', 'get_config', 'set_config', 'cli', 'dataset',
           'exceptions', 'fixation', 'formats', 'metrics', 'report',
           'spatial', 'synth', 'trace']
