"""Robustness attacks applied to evaluation images: JPEG re-encode, rescale.

Attacks operate on HWC uint8 RGB arrays and always preserve dimensions. The
scale attack downsamples by a ratio and upsamples straight back, so the
evaluation input size never changes and ground-truth masks stay valid.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import cv2
import numpy as np

from .errors import AttackError

# evaluation protocol: clean pass plus two JPEG qualities and two scale ratios
ATTACK_SUITE: List[Optional[Tuple[str, float]]] = [
    None,
    ("jpeg", 70),
    ("jpeg", 50),
    ("scale", 0.7),
    ("scale", 0.5),
]


def attack_tag(attack: Optional[Tuple[str, float]]) -> str:
    """Filename-safe tag: none, jpeg70, scale0.7, ..."""
    if attack is None:
        return "none"
    kind, param = attack
    if kind == "jpeg":
        return f"jpeg{int(param)}"
    return f"{kind}{param:g}"


def jpeg_attack(img: np.ndarray, quality: int) -> np.ndarray:
    """Encode to JPEG at ``quality`` and decode back; same dimensions."""
    if not (1 <= int(quality) <= 100):
        raise AttackError(f"JPEG quality must be in [1, 100], got {quality}")
    ok, buf = cv2.imencode(
        ".jpg", cv2.cvtColor(img, cv2.COLOR_RGB2BGR),
        [int(cv2.IMWRITE_JPEG_QUALITY), int(quality)],
    )
    if not ok:
        raise AttackError(f"JPEG encode failed at quality {quality}")
    decoded = cv2.imdecode(buf, cv2.IMREAD_COLOR)
    if decoded is None or decoded.shape[:2] != img.shape[:2]:
        raise AttackError("JPEG decode failed or changed dimensions")
    return cv2.cvtColor(decoded, cv2.COLOR_BGR2RGB)


def scale_attack(img: np.ndarray, ratio: float) -> np.ndarray:
    """Bilinear downscale by ``ratio`` then upscale back to the original size."""
    if not (0.0 < ratio <= 1.0):
        raise AttackError(f"scale ratio must be in (0, 1], got {ratio}")
    h, w = img.shape[:2]
    nh, nw = max(1, int(h * ratio)), max(1, int(w * ratio))
    small = cv2.resize(img, (nw, nh), interpolation=cv2.INTER_LINEAR)
    return cv2.resize(small, (w, h), interpolation=cv2.INTER_LINEAR)


def apply_attack(img: np.ndarray, attack: Optional[Tuple[str, float]]) -> np.ndarray:
    if attack is None:
        return img
    kind, param = attack
    if kind == "jpeg":
        return jpeg_attack(img, int(param))
    if kind == "scale":
        return scale_attack(img, float(param))
    raise AttackError(f"unknown attack kind '{kind}'")
