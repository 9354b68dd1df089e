"""Pixel-wise fusion of RGB and frequency feature maps.

At each backbone level both streams produce same-shaped maps. A pair of 1x1
scoring convs (one per stream, independent weights) looks at the concatenated
pair and emits a single logit per pixel per stream; a two-way softmax across
the pair turns these into convex weights, which are broadcast over channels to
blend the streams. A plain concat+1x1 fusion is kept as a baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn

from .errors import ConfigError


@dataclass
class GatePair:
    """Per-pixel convex weights for (rgb, frequency), each ``[B, 1, H, W]``.

    ``raw_rgb`` / ``raw_frequency`` keep the pre-softmax logits for
    inspection; the softmaxed pair always sums to one per pixel.
    """

    rgb: torch.Tensor
    frequency: torch.Tensor
    raw_rgb: Optional[torch.Tensor] = None
    raw_frequency: Optional[torch.Tensor] = None

    def __post_init__(self):
        if self.rgb.shape != self.frequency.shape:
            raise ValueError(
                f"gate shapes differ: {tuple(self.rgb.shape)} vs {tuple(self.frequency.shape)}"
            )


class CrossAttentionFusion(nn.Module):
    """Blend two ``[B, C, H, W]`` maps with a learned pixel-wise two-way softmax."""

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels
        self.score_rgb = nn.Conv2d(2 * channels, 1, kernel_size=1)
        self.score_freq = nn.Conv2d(2 * channels, 1, kernel_size=1)

    def gates(self, rgb: torch.Tensor, freq: torch.Tensor) -> GatePair:
        if rgb.shape != freq.shape:
            raise ConfigError(
                f"stream shapes differ: {tuple(rgb.shape)} vs {tuple(freq.shape)}"
            )
        if rgb.shape[1] != self.channels:
            raise ConfigError(
                f"streams have {rgb.shape[1]} channels, layer built for {self.channels}"
            )
        both = torch.cat([rgb, freq], dim=1)
        raw_rgb = self.score_rgb(both)
        raw_freq = self.score_freq(both)
        weights = torch.softmax(torch.cat([raw_rgb, raw_freq], dim=1), dim=1)
        return GatePair(
            rgb=weights[:, 0:1],
            frequency=weights[:, 1:2],
            raw_rgb=raw_rgb,
            raw_frequency=raw_freq,
        )

    def forward(self, rgb: torch.Tensor, freq: torch.Tensor, return_gates: bool = False):
        pair = self.gates(rgb, freq)
        fused = rgb * pair.rgb + freq * pair.frequency
        if return_gates:
            return fused, pair
        return fused


class ConcatFusion(nn.Module):
    """Baseline fusion: concat along channels, 1x1 conv back to C."""

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels
        self.project = nn.Conv2d(2 * channels, channels, kernel_size=1)

    def forward(self, rgb: torch.Tensor, freq: torch.Tensor) -> torch.Tensor:
        if rgb.shape != freq.shape:
            raise ConfigError(
                f"stream shapes differ: {tuple(rgb.shape)} vs {tuple(freq.shape)}"
            )
        return self.project(torch.cat([rgb, freq], dim=1))
