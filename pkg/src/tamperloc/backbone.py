"""Residual trunk shared by the RGB and frequency streams.

Standard basic/bottleneck residual stages, trained from scratch. The stem is
kept separate from the four stages so the frequency stream can swap in its
own head: both streams feed a 64-channel map at quarter resolution into
identical (independently weighted) stages and emit features at strides
4, 8, 16, 32.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ConfigError


class BasicBlock(nn.Module):
    expansion = 1

    def __init__(self, in_channels: int, channels: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(
            in_channels, channels, kernel_size=3, stride=stride, padding=1, bias=False
        )
        self.bn1 = nn.BatchNorm2d(channels)
        self.conv2 = nn.Conv2d(channels, channels, kernel_size=3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(channels)
        self.downsample = None
        if stride != 1 or in_channels != channels * self.expansion:
            self.downsample = nn.Sequential(
                nn.Conv2d(
                    in_channels, channels * self.expansion, kernel_size=1,
                    stride=stride, bias=False,
                ),
                nn.BatchNorm2d(channels * self.expansion),
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        identity = x if self.downsample is None else self.downsample(x)
        out = F.relu(self.bn1(self.conv1(x)), inplace=True)
        out = self.bn2(self.conv2(out))
        return F.relu(out + identity, inplace=True)


class Bottleneck(nn.Module):
    expansion = 4

    def __init__(self, in_channels: int, channels: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, channels, kernel_size=1, bias=False)
        self.bn1 = nn.BatchNorm2d(channels)
        self.conv2 = nn.Conv2d(
            channels, channels, kernel_size=3, stride=stride, padding=1, bias=False
        )
        self.bn2 = nn.BatchNorm2d(channels)
        self.conv3 = nn.Conv2d(channels, channels * self.expansion, kernel_size=1, bias=False)
        self.bn3 = nn.BatchNorm2d(channels * self.expansion)
        self.downsample = None
        if stride != 1 or in_channels != channels * self.expansion:
            self.downsample = nn.Sequential(
                nn.Conv2d(
                    in_channels, channels * self.expansion, kernel_size=1,
                    stride=stride, bias=False,
                ),
                nn.BatchNorm2d(channels * self.expansion),
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        identity = x if self.downsample is None else self.downsample(x)
        out = F.relu(self.bn1(self.conv1(x)), inplace=True)
        out = F.relu(self.bn2(self.conv2(out)), inplace=True)
        out = self.bn3(self.conv3(out))
        return F.relu(out + identity, inplace=True)


ARCHS = {
    "resnet18": (BasicBlock, (2, 2, 2, 2)),
    "resnet50": (Bottleneck, (3, 4, 6, 3)),
    "resnet101": (Bottleneck, (3, 4, 23, 3)),
}


class RGBStem(nn.Module):
    """7x7 stride-2 conv plus 3x3 stride-2 max pool.

    Forward returns (pre-pool feature at H/2, pooled feature at H/4); the
    boundary stream seeds its state from the former, the residual stages
    consume the latter.
    """

    def __init__(self, out_channels: int = 64):
        super().__init__()
        self.conv = nn.Conv2d(3, out_channels, kernel_size=7, stride=2, padding=3, bias=False)
        self.bn = nn.BatchNorm2d(out_channels)
        self.pool = nn.MaxPool2d(kernel_size=3, stride=2, padding=1)

    def forward(self, x: torch.Tensor):
        half = F.relu(self.bn(self.conv(x)), inplace=True)
        return half, self.pool(half)


class ResNetTrunk(nn.Module):
    """Four residual stages; forward returns features at strides 4, 8, 16, 32."""

    def __init__(self, arch: str = "resnet18", in_channels: int = 64):
        super().__init__()
        if arch not in ARCHS:
            raise ConfigError(f"unknown backbone '{arch}', choose from {sorted(ARCHS)}")
        block, counts = ARCHS[arch]
        self.arch = arch
        widths = (64, 128, 256, 512)
        strides = (1, 2, 2, 2)
        stages = []
        channels = in_channels
        for width, count, stride in zip(widths, counts, strides):
            layers = []
            for i in range(count):
                layers.append(block(channels, width, stride if i == 0 else 1))
                channels = width * block.expansion
            stages.append(nn.Sequential(*layers))
        self.stages = nn.ModuleList(stages)
        self.level_channels = [w * block.expansion for w in widths]

    def forward(self, x: torch.Tensor):
        feats = []
        for stage in self.stages:
            x = stage(x)
            feats.append(x)
        return feats
