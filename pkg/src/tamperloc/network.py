"""Full tamper-localization model: two-stream encoder, fusion, boundary, decoder.

The RGB stream is a standard residual encoder. The frequency stream replaces
the stem with the block-DCT head and runs an identically shaped (separately
weighted) trunk, so both streams emit same-shaped features at strides 4 to 32
that a per-level fusion can blend. The fused maps feed a full-resolution
boundary stream and an atrous-pyramid decoder that emits region logits.

Ablation flags carve the same code into single-stream and fusion-only
variants: either stream can be dropped, cross-attention fusion can fall back
to concat+1x1, and the boundary stream can be removed entirely. Checkpoints
store the config and refuse to load into a differently configured model.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from .backbone import ARCHS, ResNetTrunk, RGBStem
from .boundary import BoundaryInput, BoundaryStream
from .errors import ConfigError
from .freq_select import FrequencyHead
from .fusion import ConcatFusion, CrossAttentionFusion

CHECKPOINT_FORMAT_VERSION = 1


@dataclass
class NetworkConfig:
    backbone: str = "resnet18"
    input_size: int = 256
    freq_out_channels: int = 64
    boundary_channels: int = 32
    boundary_units: int = 4
    block_size: int = 8
    reduction: int = 8
    use_rgb: bool = True
    use_frequency: bool = True
    use_cross_fusion: bool = True
    use_boundary: bool = True

    def __post_init__(self):
        self.backbone = self.backbone.replace("-shape", "")
        if self.backbone not in ARCHS:
            raise ConfigError(
                f"unknown backbone '{self.backbone}', choose from {sorted(ARCHS)}"
            )
        if self.input_size % 32:
            raise ConfigError(f"input_size must be divisible by 32, got {self.input_size}")
        if not (self.use_rgb or self.use_frequency):
            raise ConfigError("at least one of use_rgb / use_frequency must be set")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        return cls(**data)


@dataclass
class PredictionPair:
    """Region and boundary logits, both [B, 1, H, W]; boundary absent when the boundary stream is off."""

    region_logits: torch.Tensor
    boundary_logits: Optional[torch.Tensor] = None


class AtrousPyramid(nn.Module):
    """Parallel dilated branches (rates 1, 6, 12, 18) merged by a 1x1 conv."""

    def __init__(self, in_channels: int, out_channels: int = 128):
        super().__init__()
        def branch(rate):
            if rate == 1:
                conv = nn.Conv2d(in_channels, out_channels, kernel_size=1, bias=False)
            else:
                conv = nn.Conv2d(
                    in_channels, out_channels, kernel_size=3,
                    padding=rate, dilation=rate, bias=False,
                )
            return nn.Sequential(conv, nn.BatchNorm2d(out_channels), nn.ReLU(inplace=True))

        self.branches = nn.ModuleList(branch(r) for r in (1, 6, 12, 18))
        self.merge = nn.Sequential(
            nn.Conv2d(4 * out_channels, out_channels, kernel_size=1, bias=False),
            nn.BatchNorm2d(out_channels),
            nn.ReLU(inplace=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.merge(torch.cat([b(x) for b in self.branches], dim=1))


class Decoder(nn.Module):
    """Context on m5, upsample to the m2 grid, refine with skip + boundary cues.

    The boundary feature is downsampled to the skip grid and concatenated as
    extra evidence (zeros when the boundary stream is disabled), then two 3x3
    convs and a final upsample produce full-resolution region logits.
    """

    def __init__(
        self,
        deep_channels: int,
        skip_channels: int,
        boundary_channels: int,
        width: int = 128,
        skip_width: int = 48,
    ):
        super().__init__()
        self.boundary_channels = boundary_channels
        self.context = AtrousPyramid(deep_channels, width)
        self.skip = nn.Sequential(
            nn.Conv2d(skip_channels, skip_width, kernel_size=1, bias=False),
            nn.BatchNorm2d(skip_width),
            nn.ReLU(inplace=True),
        )
        self.refine = nn.Sequential(
            nn.Conv2d(width + skip_width + boundary_channels, width, kernel_size=3,
                      padding=1, bias=False),
            nn.BatchNorm2d(width),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, width, kernel_size=3, padding=1, bias=False),
            nn.BatchNorm2d(width),
            nn.ReLU(inplace=True),
        )
        self.head = nn.Conv2d(width, 1, kernel_size=1)

    def forward(
        self,
        m2: torch.Tensor,
        m5: torch.Tensor,
        boundary_feature: Optional[torch.Tensor],
        out_size,
    ) -> torch.Tensor:
        deep = self.context(m5)
        deep = F.interpolate(deep, size=m2.shape[-2:], mode="bilinear", align_corners=False)
        if boundary_feature is None:
            boundary_feature = deep.new_zeros(
                deep.shape[0], self.boundary_channels, *m2.shape[-2:]
            )
        elif boundary_feature.shape[-2:] != m2.shape[-2:]:
            boundary_feature = F.interpolate(
                boundary_feature, size=m2.shape[-2:], mode="bilinear", align_corners=False
            )
        fused = torch.cat([deep, self.skip(m2), boundary_feature], dim=1)
        logits = self.head(self.refine(fused))
        return F.interpolate(logits, size=out_size, mode="bilinear", align_corners=False)


class TamperNet(nn.Module):
    """Pixel-level tamper localization from pixel-255 RGB batches."""

    def __init__(self, config: Optional[NetworkConfig] = None):
        super().__init__()
        self.config = config or NetworkConfig()
        cfg = self.config

        self.stem = RGBStem(64) if cfg.use_rgb else None
        self.rgb_trunk = ResNetTrunk(cfg.backbone, in_channels=64) if cfg.use_rgb else None
        self.freq_head = (
            FrequencyHead(cfg.block_size, cfg.reduction, cfg.freq_out_channels)
            if cfg.use_frequency else None
        )
        self.freq_trunk = (
            ResNetTrunk(cfg.backbone, in_channels=cfg.freq_out_channels)
            if cfg.use_frequency else None
        )

        trunk = self.rgb_trunk or self.freq_trunk
        self.level_channels = list(trunk.level_channels)

        self.fusions = None
        if cfg.use_rgb and cfg.use_frequency:
            fusion_cls = CrossAttentionFusion if cfg.use_cross_fusion else ConcatFusion
            self.fusions = nn.ModuleList(fusion_cls(c) for c in self.level_channels)

        self.boundary_input = None
        self.boundary_stream = None
        if cfg.use_boundary:
            seed_channels = 64 if cfg.use_rgb else cfg.freq_out_channels
            self.boundary_input = BoundaryInput(seed_channels, cfg.boundary_channels)
            self.boundary_stream = BoundaryStream(
                self.level_channels, cfg.boundary_channels, cfg.boundary_units
            )

        self.decoder = Decoder(
            deep_channels=self.level_channels[3],
            skip_channels=self.level_channels[0],
            boundary_channels=cfg.boundary_channels,
        )

    def encoder_forward(self, x: torch.Tensor):
        """Run both streams and fusion; returns (rgb_feats, freq_feats, fused, aux).

        Feature lists hold levels 2..5 (or None for a disabled stream); aux
        carries the boundary seed, frequency-channel weights, and gate pairs.
        """
        aux = {"alpha": None, "gates": [], "boundary_seed": None}
        rgb_feats = freq_feats = None
        if self.stem is not None:
            half, pooled = self.stem(x / 255.0)
            rgb_feats = self.rgb_trunk(pooled)
            aux["boundary_seed"] = half
        if self.freq_head is not None:
            f1, alpha = self.freq_head(x, return_weights=True)
            freq_feats = self.freq_trunk(f1)
            aux["alpha"] = alpha
            if aux["boundary_seed"] is None:
                aux["boundary_seed"] = f1

        if self.fusions is not None:
            fused = []
            for fuse, r_i, f_i in zip(self.fusions, rgb_feats, freq_feats):
                if isinstance(fuse, CrossAttentionFusion):
                    m_i, gates = fuse(r_i, f_i, return_gates=True)
                    aux["gates"].append(gates)
                else:
                    m_i = fuse(r_i, f_i)
                fused.append(m_i)
        else:
            fused = list(rgb_feats or freq_feats)
        return rgb_feats, freq_feats, fused, aux

    def forward(self, x: torch.Tensor, return_aux: bool = False):
        if x.dim() != 4 or x.shape[1] != 3:
            raise ConfigError(f"expected [B, 3, H, W] input, got {tuple(x.shape)}")
        size = x.shape[-2:]
        _, _, fused, aux = self.encoder_forward(x)

        boundary_logits = None
        boundary_feature = None
        if self.boundary_stream is not None:
            seed = self.boundary_input(aux["boundary_seed"], size)
            boundary_logits, boundary_feature = self.boundary_stream(seed, fused)

        region_logits = self.decoder(fused[0], fused[3], boundary_feature, size)
        preds = PredictionPair(region_logits=region_logits, boundary_logits=boundary_logits)
        if return_aux:
            return preds, aux
        return preds


def save_checkpoint(model: TamperNet, path, extra: Optional[dict] = None) -> None:
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "state_dict": model.state_dict(),
        "extra": extra or {},
    }
    torch.save(payload, path)


def load_checkpoint(path, config: Optional[NetworkConfig] = None):
    """Rebuild a model from a checkpoint; returns (model, payload).

    If ``config`` is given it must match the stored one key for key;
    otherwise the stored config is used as-is.
    """
    payload = torch.load(path, map_location="cpu", weights_only=False)
    version = payload.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ConfigError(
            f"checkpoint format version {version} != supported {CHECKPOINT_FORMAT_VERSION}"
        )
    stored = payload["config"]
    if config is not None:
        wanted = config.to_dict()
        mismatched = sorted(
            key for key in set(stored) | set(wanted)
            if stored.get(key) != wanted.get(key)
        )
        if mismatched:
            detail = ", ".join(
                f"{k}: checkpoint={stored.get(k)!r} requested={wanted.get(k)!r}"
                for k in mismatched
            )
            raise ConfigError(f"checkpoint config mismatch ({detail})")
    model = TamperNet(NetworkConfig.from_dict(stored))
    model.load_state_dict(payload["state_dict"])
    return model, payload
