"""Checkpoint loading and image-in, probability-map-out prediction."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from .network import NetworkConfig, TamperNet, load_checkpoint


def load_predictor(checkpoint_path, expect: Optional[NetworkConfig] = None) -> TamperNet:
    model, _ = load_checkpoint(checkpoint_path, expect)
    model.eval()
    return model


def _to_batch(image: np.ndarray, size: int) -> torch.Tensor:
    t = torch.from_numpy(image.copy()).permute(2, 0, 1).float().unsqueeze(0)
    if t.shape[-2:] != (size, size):
        t = F.interpolate(t, size=(size, size), mode="bilinear", align_corners=False)
    return t


def _to_map(logits: torch.Tensor, out_hw) -> np.ndarray:
    prob = torch.sigmoid(logits)
    if prob.shape[-2:] != tuple(out_hw):
        prob = F.interpolate(prob, size=out_hw, mode="bilinear", align_corners=False)
    return prob[0, 0].cpu().numpy()


@torch.no_grad()
def predict_prob(
    model: TamperNet, image: np.ndarray
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """(region prob HW, boundary prob HW or None) at the image's own size.

    The image is resized to the model's configured input size for the
    forward pass and the maps are resized back.
    """
    out_hw = image.shape[:2]
    preds = model(_to_batch(image, model.config.input_size))
    region = _to_map(preds.region_logits, out_hw)
    boundary = None
    if preds.boundary_logits is not None:
        boundary = _to_map(preds.boundary_logits, out_hw)
    return region, boundary


@torch.no_grad()
def channel_weights(model: TamperNet, image: np.ndarray) -> Optional[np.ndarray]:
    """Frequency-channel gate values [K] for one image, None without that stream."""
    if model.freq_head is None:
        return None
    _, aux = model(_to_batch(image, model.config.input_size), return_aux=True)
    return aux["alpha"][0].cpu().numpy()


def make_predictor(model: TamperNet):
    """Callable HWC uint8 -> HW region probability, for the evaluation harness."""
    return lambda image: predict_prob(model, image)[0]
