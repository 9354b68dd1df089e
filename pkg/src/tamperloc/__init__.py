"""Pixel-level image tamper localization.

A two-stream segmentation network that pairs an RGB encoder with a block-DCT
frequency encoder, blends them with pixel-wise cross-attention gates, refines
tamper seams in a full-resolution gated boundary stream, and decodes a region
mask. Ships with a synthetic copy-move/splice corpus generator, MCC/F1
evaluation, and JPEG/rescale robustness attacks.
"""

from .boundary import make_boundary_gt
from .datagen import GenOptions, SamplePair, build_corpus, generate_copy_move, generate_splice
from .frequency import FrequencyVolume, block_dct_rearrange, normalize_channels, rgb_to_ycbcr_resized
from .losses import LossBundle, boundary_aware_loss, total_loss, weighted_bce
from .metrics import MetricsReport, evaluate_dataset, score_mask
from .network import NetworkConfig, PredictionPair, TamperNet, load_checkpoint, save_checkpoint

__version__ = "0.1.0"

__all__ = [
    "FrequencyVolume",
    "GenOptions",
    "LossBundle",
    "MetricsReport",
    "NetworkConfig",
    "PredictionPair",
    "SamplePair",
    "TamperNet",
    "block_dct_rearrange",
    "boundary_aware_loss",
    "build_corpus",
    "evaluate_dataset",
    "generate_copy_move",
    "generate_splice",
    "load_checkpoint",
    "make_boundary_gt",
    "normalize_channels",
    "rgb_to_ycbcr_resized",
    "save_checkpoint",
    "score_mask",
    "total_loss",
    "weighted_bce",
    "__version__",
]
