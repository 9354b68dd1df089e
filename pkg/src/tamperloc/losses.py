"""Composite training objective: region BCE + boundary BCE + edge-restricted term.

All three terms are class-weighted binary cross-entropies. The region and
boundary maps use a weight beta = fraction of negative pixels, so sparse
tamper masks do not drown the positive class. The third term re-scores the
region prediction only at boundary ground-truth pixels, pushing the region
map to commit right at the seam; it is normalized by the full pixel count,
not the edge count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import torch

from .errors import NumericsError

PROB_EPS = 1e-7
BETA_MIN = 0.05
BETA_MAX = 0.95

DEFAULT_LAMBDAS = (0.05, 0.05, 0.9)


@dataclass
class LossBundle:
    """Scalar loss terms; total is exactly the lambda-weighted sum."""

    total: torch.Tensor
    region: torch.Tensor
    boundary: torch.Tensor
    aware: torch.Tensor
    lambdas: Tuple[float, float, float]
    class_weights: Tuple[float, float]

    def __post_init__(self):
        for name in ("total", "region", "boundary", "aware"):
            value = getattr(self, name)
            if not torch.isfinite(value):
                raise NumericsError(f"{name} loss is not finite: {value}")


def _clamped_probs(logits: torch.Tensor) -> torch.Tensor:
    return torch.sigmoid(logits).clamp(PROB_EPS, 1.0 - PROB_EPS)


def weighted_bce(pred_logits: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Class-balanced BCE, beta = #negatives / #pixels clamped to [0.05, 0.95]."""
    if pred_logits.shape != target.shape:
        raise ValueError(
            f"shape mismatch: {tuple(pred_logits.shape)} vs {tuple(target.shape)}"
        )
    if target.numel() == 0:
        return pred_logits.new_tensor(0.0)
    target = target.float()
    beta = (1.0 - target).mean().clamp(BETA_MIN, BETA_MAX)
    p = _clamped_probs(pred_logits)
    per_pixel = beta * target * torch.log(p) + (1.0 - beta) * (1.0 - target) * torch.log(1.0 - p)
    return -per_pixel.mean()


def edge_class_weights(
    region_gt: torch.Tensor, edge_gt: torch.Tensor
) -> Tuple[torch.Tensor, torch.Tensor]:
    """(w1, w2) from the region class balance at edge pixels.

    w1 weights the positive region term and equals the negative fraction
    among edge pixels (clamped like beta); no edge pixels gives (0.5, 0.5).
    """
    edge = edge_gt.float()
    count = edge.sum()
    if count.item() == 0:
        half = region_gt.new_tensor(0.5)
        return half, 1.0 - half
    neg_frac = ((1.0 - region_gt.float()) * edge).sum() / count
    w1 = neg_frac.clamp(BETA_MIN, BETA_MAX)
    return w1, 1.0 - w1


def boundary_aware_loss(
    region_logits: torch.Tensor,
    region_gt: torch.Tensor,
    edge_gt: torch.Tensor,
    w1,
    w2,
) -> torch.Tensor:
    """Region cross-entropy restricted to edge pixels, divided by total pixels.

    loss = -(1/N) sum_i [edge_i = 1] * (w1 * y_i * log p_i + w2 * (1 - y_i) * log(1 - p_i))
    with N the full pixel count, so the term scales with edge density.
    """
    if not (region_logits.shape == region_gt.shape == edge_gt.shape):
        raise ValueError(
            "shape mismatch: "
            f"{tuple(region_logits.shape)}, {tuple(region_gt.shape)}, {tuple(edge_gt.shape)}"
        )
    edge = edge_gt.float()
    if edge.sum().item() == 0:
        return region_logits.new_tensor(0.0)
    y = region_gt.float()
    p = _clamped_probs(region_logits)
    per_pixel = edge * (w1 * y * torch.log(p) + w2 * (1.0 - y) * torch.log(1.0 - p))
    return -per_pixel.sum() / edge.numel()


def total_loss(
    preds,
    region_gt: torch.Tensor,
    edge_gt: torch.Tensor,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    boundary_logits: Optional[torch.Tensor] = None,
) -> LossBundle:
    """Weighted sum of the three terms for a (region, boundary) prediction pair.

    ``preds`` is a PredictionPair or the raw region logits; topologies without
    a boundary stream contribute a zero boundary term.
    """
    region_logits = getattr(preds, "region_logits", preds)
    if boundary_logits is None:
        boundary_logits = getattr(preds, "boundary_logits", None)
    l1, l2, l3 = (float(v) for v in lambdas)

    region = weighted_bce(region_logits, region_gt)
    if boundary_logits is None:
        boundary = region_logits.new_tensor(0.0)
    else:
        boundary = weighted_bce(boundary_logits, edge_gt)
    w1, w2 = edge_class_weights(region_gt, edge_gt)
    aware = boundary_aware_loss(region_logits, region_gt, edge_gt, w1, w2)
    total = l1 * region + l2 * boundary + l3 * aware
    return LossBundle(
        total=total,
        region=region,
        boundary=boundary,
        aware=aware,
        lambdas=(l1, l2, l3),
        class_weights=(float(w1), float(w2)),
    )
