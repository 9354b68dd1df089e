"""Pixel-level MCC / F1 scoring and corpus evaluation.

Scores are computed per image from the confusion matrix at a fixed threshold
(strict greater-than, so a tie at the threshold counts as negative) and then
averaged arithmetically across images. Any metric whose denominator is zero
is defined as 0, which makes an empty prediction on an empty mask score 0,
not 1; reports record this per-image averaging convention in their summary.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DataError
from .attacks import apply_attack, attack_tag


def score_mask(
    pred_prob: np.ndarray, gt: np.ndarray, threshold: float = 0.5
) -> Tuple[float, float]:
    """(MCC, F1) of a probability map against a binary mask."""
    if pred_prob.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred_prob.shape} vs {gt.shape}")
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    pred = pred_prob > threshold
    truth = gt > 0
    tp = float(np.logical_and(pred, truth).sum())
    fp = float(np.logical_and(pred, ~truth).sum())
    fn = float(np.logical_and(~pred, truth).sum())
    tn = float(np.logical_and(~pred, ~truth).sum())

    f1_den = 2 * tp + fp + fn
    f1 = 2 * tp / f1_den if f1_den > 0 else 0.0
    mcc_den = math.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    mcc = (tp * tn - fp * fn) / mcc_den if mcc_den > 0 else 0.0
    return mcc, f1


@dataclass
class MetricsReport:
    per_image: List[Tuple[str, float, float]]
    mean_mcc: float
    mean_f1: float
    threshold: float
    attack: Optional[Tuple[str, float]] = None
    skipped: int = 0
    averaging: str = "per-image"

    @classmethod
    def from_rows(
        cls,
        rows: List[Tuple[str, float, float]],
        threshold: float,
        attack=None,
        skipped: int = 0,
    ) -> "MetricsReport":
        mean_mcc = float(np.mean([r[1] for r in rows])) if rows else 0.0
        mean_f1 = float(np.mean([r[2] for r in rows])) if rows else 0.0
        return cls(rows, mean_mcc, mean_f1, threshold, attack, skipped)

    def summary(self) -> dict:
        return {
            "attack": attack_tag(self.attack),
            "mean_mcc": self.mean_mcc,
            "mean_f1": self.mean_f1,
            "threshold": self.threshold,
            "images": len(self.per_image),
            "skipped": self.skipped,
            "averaging": self.averaging,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "mcc", "f1"])
            for row in self.per_image:
                writer.writerow([row[0], f"{row[1]:.6f}", f"{row[2]:.6f}"])

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=1))


def evaluate_dataset(
    predict: Callable[[np.ndarray], np.ndarray],
    corpus,
    split: str = "test",
    attack: Optional[Tuple[str, float]] = None,
    threshold: float = 0.5,
) -> MetricsReport:
    """Score ``predict`` over a corpus split, optionally attacking inputs first.

    ``predict`` maps an HWC uint8 RGB image to an HW probability map at the
    same size. Attacks touch only the image, never the mask. Unreadable
    samples are skipped and counted.
    """
    rows = []
    skipped = 0
    for row in corpus.rows(split):
        try:
            img, mask = corpus.load_sample(row)
        except DataError:
            skipped += 1
            continue
        img = apply_attack(img, attack)
        prob = predict(img)
        mcc, f1 = score_mask(prob, mask, threshold)
        rows.append((row["id"], mcc, f1))
    return MetricsReport.from_rows(rows, threshold, attack, skipped)
