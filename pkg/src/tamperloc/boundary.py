"""Full-resolution boundary stream with gated conv refinement.

The stream keeps a feature state at image resolution and refines it over a
fixed number of units. Each unit runs a residual block, then a gated conv
layer: a single-channel sigmoid attention map is scored from the concatenated
(fused two-stream map, state) pair and decides per pixel how much boundary
evidence passes; a residual add keeps the ungated state reachable, and a
learned per-channel weight rescales the result. Later units see deeper fusion
levels; the schedule clamps at the deepest level once it runs out.

Boundary ground truth is the morphological gradient of the region mask:
dilation minus erosion with a 3x3 square element, with pixels outside the
image treated as background.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ConfigError


def make_boundary_gt(mask: torch.Tensor, kernel_size: int = 3) -> torch.Tensor:
    """Binary boundary map from a binary region mask ``[B, 1, H, W]``.

    Dilation and erosion both pad with zeros, so a foreground region touching
    the image border contributes a boundary along that border (erosion sees
    the outside as background and shrinks the region there).
    """
    if kernel_size % 2 == 0:
        raise ConfigError(f"kernel_size must be odd, got {kernel_size}")
    if mask.dim() != 4 or mask.shape[1] != 1:
        raise ConfigError(f"expected [B, 1, H, W] mask, got {tuple(mask.shape)}")
    pad = kernel_size // 2
    padded = F.pad(mask.float(), (pad, pad, pad, pad), value=0.0)
    dilated = F.max_pool2d(padded, kernel_size, stride=1)
    eroded = -F.max_pool2d(-padded, kernel_size, stride=1)
    return dilated - eroded


@dataclass
class BoundaryState:
    """State after unit ``t``: features ``[B, C_b, H, W]``, gate ``[B, 1, H, W]``."""

    t: int
    features: torch.Tensor
    attention: Optional[torch.Tensor] = None


class ResidualBlock(nn.Module):
    """Two 3x3 convs with BN and an identity skip, constant width."""

    def __init__(self, channels: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv2d(channels, channels, kernel_size=3, padding=1, bias=False),
            nn.BatchNorm2d(channels),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels, channels, kernel_size=3, padding=1, bias=False),
            nn.BatchNorm2d(channels),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.relu(x + self.body(x))


class GatedConvLayer(nn.Module):
    """Gate the state with a projected fused map: out = (b * gate + b) * w.

    ``gate`` is a single-channel sigmoid over a BN'd 1x1 conv of the
    concatenated (map, state) pair, broadcast across channels. ``w`` is a
    learned per-channel scale initialized to one, so a closed gate with unit
    weights leaves the state untouched and an open gate doubles it.
    """

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels
        self.score = nn.Conv2d(2 * channels, 1, kernel_size=1)
        self.norm = nn.BatchNorm2d(1)
        self.weight = nn.Parameter(torch.ones(channels))

    def forward(self, state: torch.Tensor, fused: torch.Tensor):
        """Returns (next state, attention map). ``fused`` must already be
        ``[B, C_b, H, W]`` (projected and upsampled by the caller)."""
        if fused.shape != state.shape:
            raise ConfigError(
                f"fused map shape {tuple(fused.shape)} != state shape {tuple(state.shape)}"
            )
        gate = torch.sigmoid(self.norm(self.score(torch.cat([fused, state], dim=1))))
        return (state * gate + state) * self.weight.view(1, -1, 1, 1), gate


class BoundaryInput(nn.Module):
    """Project a feature map to the stream width and lift it to full resolution."""

    def __init__(self, in_channels: int, width: int = 32):
        super().__init__()
        self.project = nn.Sequential(
            nn.Conv2d(in_channels, width, kernel_size=1, bias=False),
            nn.BatchNorm2d(width),
            nn.ReLU(inplace=True),
        )

    def forward(self, feat: torch.Tensor, size) -> torch.Tensor:
        out = self.project(feat)
        if out.shape[-2:] != tuple(size):
            out = F.interpolate(out, size=size, mode="bilinear", align_corners=False)
        return out


class BoundaryStream(nn.Module):
    """Stack of (residual block, gated conv) units plus a 1-channel head.

    ``map_channels`` lists the channel counts of the fused maps at levels
    2..5; unit t reads level min(t + 2, 5). Each unit owns a 1x1 projection
    from its fusion map's channels to the stream width; projection and
    bilinear upsampling commute, so the cheap order (project at low
    resolution, then upsample) is used.
    """

    def __init__(self, map_channels, width: int = 32, units: int = 4):
        super().__init__()
        if len(map_channels) != 4:
            raise ConfigError(f"need channel counts for levels 2..5, got {len(map_channels)}")
        self.width = width
        self.units = units
        self.levels = [min(t + 2, 5) for t in range(1, units + 1)]
        self.projections = nn.ModuleList(
            nn.Sequential(
                nn.Conv2d(map_channels[level - 2], width, kernel_size=1, bias=False),
                nn.BatchNorm2d(width),
                nn.ReLU(inplace=True),
            )
            for level in self.levels
        )
        self.blocks = nn.ModuleList(ResidualBlock(width) for _ in range(units))
        self.gates = nn.ModuleList(GatedConvLayer(width) for _ in range(units))
        self.head = nn.Conv2d(width, 1, kernel_size=1)

    def forward(self, state: torch.Tensor, fused_maps, return_states: bool = False):
        """Refine ``state`` with ``fused_maps`` = [m2, m3, m4, m5].

        Returns (boundary logits, final features) and, if asked, the list of
        per-unit BoundaryState records.
        """
        if len(fused_maps) != 4:
            raise ConfigError(f"expected 4 fused maps, got {len(fused_maps)}")
        size = state.shape[-2:]
        states = []
        for t, (project, block, gate, level) in enumerate(
            zip(self.projections, self.blocks, self.gates, self.levels), start=1
        ):
            fused = project(fused_maps[level - 2])
            if fused.shape[-2:] != size:
                fused = F.interpolate(fused, size=size, mode="bilinear", align_corners=False)
            state, attention = gate(block(state), fused)
            if return_states:
                states.append(BoundaryState(t=t, features=state, attention=attention))
        logits = self.head(state)
        if return_states:
            return logits, state, states
        return logits, state
