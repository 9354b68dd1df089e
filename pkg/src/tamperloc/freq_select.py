"""Learned per-channel weighting of the frequency volume.

A squeeze-excitation style gate scores each of the K frequency channels in
[0, 1] and rescales them, then a modulation stage (grouped 3x3 followed by a
1x1) mixes information across frequencies and projects to the channel count
the backbone expects, replacing its first stage for the frequency stream.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ConfigError
from .frequency import block_dct_rearrange, normalize_channels, rgb_to_ycbcr_resized


class FrequencySelection(nn.Module):
    """Channel gate: GAP -> 1x1 (K -> K/r) -> BN -> ReLU -> 1x1 (K/r -> K) -> sigmoid."""

    def __init__(self, num_channels: int = 192, reduction: int = 8):
        super().__init__()
        if num_channels % reduction:
            raise ConfigError(
                f"num_channels {num_channels} not divisible by reduction {reduction}"
            )
        self.num_channels = num_channels
        self.reduction = reduction
        hidden = num_channels // reduction
        self.squeeze = nn.Conv2d(num_channels, hidden, kernel_size=1)
        self.norm = nn.BatchNorm2d(hidden)
        self.expand = nn.Conv2d(hidden, num_channels, kernel_size=1)

    def forward(self, vol: torch.Tensor):
        """Rescale ``[B, K, H, W]`` channels; returns (weighted, weights[B, K])."""
        if vol.shape[1] != self.num_channels:
            raise ConfigError(
                f"volume has {vol.shape[1]} channels, layer built for {self.num_channels}"
            )
        pooled = vol.mean(dim=(2, 3), keepdim=True)
        alpha = torch.sigmoid(self.expand(F.relu(self.norm(self.squeeze(pooled)))))
        return vol * alpha, alpha.flatten(1)


class FrequencyModulation(nn.Module):
    """Grouped 3x3 (spatial mix per channel) then 1x1 (cross-channel mix) with BN."""

    def __init__(self, num_channels: int = 192, out_channels: int = 64):
        super().__init__()
        self.mix_space = nn.Conv2d(
            num_channels, num_channels, kernel_size=3, padding=1, groups=num_channels
        )
        self.norm1 = nn.BatchNorm2d(num_channels)
        self.mix_channels = nn.Conv2d(num_channels, out_channels, kernel_size=1)
        self.norm2 = nn.BatchNorm2d(out_channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.norm2(self.mix_channels(F.relu(self.norm1(self.mix_space(x)))))


class FrequencyHead(nn.Module):
    """Pixel-255 RGB batch -> backbone-ready frequency features.

    Composes the (non-learnable) block-DCT pipeline with the selection and
    modulation layers. Output is ``[B, C, H/4, W/4]`` for a ``[B, 3, H, W]``
    input, matching the RGB stream's first-stage, post-pool resolution.
    """

    def __init__(
        self,
        block_size: int = 8,
        reduction: int = 8,
        out_channels: int = 64,
    ):
        super().__init__()
        self.block_size = block_size
        self.num_channels = 3 * block_size * block_size
        self.select = FrequencySelection(self.num_channels, reduction)
        self.modulate = FrequencyModulation(self.num_channels, out_channels)
        self.out_channels = out_channels

    def volume(self, img: torch.Tensor) -> torch.Tensor:
        """Normalized frequency volume for a ``[B, 3, H, W]`` pixel-255 batch."""
        ycbcr = rgb_to_ycbcr_resized(img)
        return normalize_channels(block_dct_rearrange(ycbcr, self.block_size)).channels

    def forward(self, img: torch.Tensor, return_weights: bool = False):
        weighted, alpha = self.select(self.volume(img))
        out = self.modulate(weighted)
        if return_weights:
            return out, alpha
        return out
