"""Block-DCT frequency pipeline.

Turns a pixel-255 RGB image into a normalized frequency volume: YCbCr
conversion (full-range BT.601, the JPEG convention), a bilinear 2x resize,
an orthonormal 2D DCT-II over non-overlapping PxP blocks, and a coefficient
rearrangement that collects each frequency (u, v) of each color component
into its own channel while keeping the block-grid layout. With P=8 the
volume has 3*64 = 192 channels at 1/4 of the resized resolution.

All functions accept arbitrary leading batch dimensions; images are
``[..., 3, H, W]`` tensors and volumes are ``[..., K, H', W']``.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

# Full-range BT.601 (JPEG) RGB -> YCbCr.
_YCBCR_MATRIX = (
    (0.299, 0.587, 0.114),
    (-0.168736, -0.331264, 0.5),
    (0.5, -0.418688, -0.081312),
)
_YCBCR_OFFSET = (0.0, 128.0, 128.0)

NORM_EPS = 1e-6


@dataclass
class FrequencyVolume:
    """Rearranged block-DCT coefficients plus per-channel statistics.

    ``channels`` is ``[..., K, H', W']`` with K = C * block_size**2 and the
    channel index ``c * P**2 + u * P + v`` holding coefficient (u, v) of
    component c for every block. ``per_channel_mean``/``per_channel_std``
    are the statistics of the volume this one was normalized from (zeros /
    ones for a raw volume).
    """

    channels: torch.Tensor
    per_channel_mean: torch.Tensor
    per_channel_std: torch.Tensor
    block_size: int
    num_channels: int

    def __post_init__(self):
        if self.channels.shape[-3] != self.num_channels:
            raise ValueError(
                f"volume has {self.channels.shape[-3]} channels, "
                f"declared {self.num_channels}"
            )


def dct_matrix(n: int, dtype=torch.float32, device=None) -> torch.Tensor:
    """Orthonormal DCT-II matrix M with (M x)_u = s_u * sum_x cos(...) x_x."""
    x = torch.arange(n, dtype=torch.float64, device=device)
    u = x.reshape(-1, 1)
    m = torch.cos(torch.pi * (2.0 * x + 1.0) * u / (2.0 * n))
    m *= torch.full((n, 1), (2.0 / n) ** 0.5, dtype=torch.float64, device=device)
    m[0] = (1.0 / n) ** 0.5
    return m.to(dtype)


def rgb_to_ycbcr(img: torch.Tensor) -> torch.Tensor:
    """Convert a pixel-255 RGB tensor ``[..., 3, H, W]`` to full-range YCbCr."""
    if img.shape[-3] != 3:
        raise ValueError(f"expected 3-channel RGB input, got {img.shape[-3]} channels")
    mat = torch.tensor(_YCBCR_MATRIX, dtype=img.dtype, device=img.device)
    off = torch.tensor(_YCBCR_OFFSET, dtype=img.dtype, device=img.device)
    out = torch.einsum("ij,...jhw->...ihw", mat, img)
    return out + off.reshape(3, 1, 1)


def rgb_to_ycbcr_resized(img: torch.Tensor) -> torch.Tensor:
    """YCbCr conversion followed by a bilinear 2x upsample.

    The doubled resolution makes the block-DCT volume land on the same grid
    as the RGB backbone's first-stage output.
    """
    if img.shape[-3] != 3:
        raise ValueError(f"expected 3-channel RGB input, got {img.shape[-3]} channels")
    if img.shape[-2] < 8 or img.shape[-1] < 8:
        raise ValueError(f"image too small: {tuple(img.shape[-2:])}, need >= 8x8")
    ycbcr = rgb_to_ycbcr(img)
    lead = ycbcr.shape[:-3]
    flat = ycbcr.reshape(-1, *ycbcr.shape[-3:])
    up = F.interpolate(flat, scale_factor=2, mode="bilinear", align_corners=False)
    return up.reshape(*lead, *up.shape[-3:])


def block_dct_rearrange(ycbcr: torch.Tensor, block_size: int = 8) -> FrequencyVolume:
    """Tile into PxP blocks, DCT each, and stack same-frequency planes.

    Works for any channel count C (K = C * P**2); the standard pipeline
    feeds 3-component YCbCr giving K = 192 for P = 8.
    """
    p = block_size
    *lead, c, h, w = ycbcr.shape
    if h % p or w % p:
        raise ValueError(f"spatial dims {(h, w)} not divisible by block size {p}")
    nh, nw = h // p, w // p
    m = dct_matrix(p, dtype=ycbcr.dtype, device=ycbcr.device)
    blocks = ycbcr.reshape(-1, c, nh, p, nw, p).permute(0, 1, 2, 4, 3, 5)
    coef = m @ blocks @ m.T
    # [B, c, nh, nw, u, v] -> channel index c*P*P + u*P + v at (nh, nw)
    vol = coef.permute(0, 1, 4, 5, 2, 3).reshape(*lead, c * p * p, nh, nw)
    k = c * p * p
    zeros = torch.zeros(*lead, k, dtype=ycbcr.dtype, device=ycbcr.device)
    ones = torch.ones(*lead, k, dtype=ycbcr.dtype, device=ycbcr.device)
    return FrequencyVolume(vol, zeros, ones, p, k)


def inverse_block_dct(vol: FrequencyVolume) -> torch.Tensor:
    """Invert the rearrangement and the per-block DCT (exact up to roundoff)."""
    p = vol.block_size
    *lead, k, nh, nw = vol.channels.shape
    c = k // (p * p)
    m = dct_matrix(p, dtype=vol.channels.dtype, device=vol.channels.device)
    coef = vol.channels.reshape(-1, c, p, p, nh, nw).permute(0, 1, 4, 5, 2, 3)
    blocks = m.T @ coef @ m
    img = blocks.permute(0, 1, 2, 4, 3, 5).reshape(*lead, c, nh * p, nw * p)
    return img


def normalize_channels(vol: FrequencyVolume, eps: float = NORM_EPS) -> FrequencyVolume:
    """Standardize every channel with its own per-image mean and std.

    Population std; a constant channel falls back to zeros through the eps
    guard. The statistics that were removed are recorded on the result.
    """
    mean = vol.channels.mean(dim=(-2, -1))
    std = vol.channels.std(dim=(-2, -1), unbiased=False)
    out = (vol.channels - mean[..., None, None]) / (std + eps)[..., None, None]
    return FrequencyVolume(out, mean, std, vol.block_size, vol.num_channels)


def denormalize_channels(vol: FrequencyVolume) -> FrequencyVolume:
    """Undo :func:`normalize_channels` using the recorded statistics."""
    out = vol.channels * (vol.per_channel_std + NORM_EPS)[..., None, None]
    out = out + vol.per_channel_mean[..., None, None]
    zeros = torch.zeros_like(vol.per_channel_mean)
    ones = torch.ones_like(vol.per_channel_std)
    return FrequencyVolume(out, zeros, ones, vol.block_size, vol.num_channels)
