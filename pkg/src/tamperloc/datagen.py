"""Synthetic tamper corpus: copy-move and splice forgeries with masks.

Images here are HWC uint8 RGB numpy arrays; the dataset layer converts to
CHW tensors. Every generator is a pure function of (inputs, seed, opts).

Copy-move picks a star-convex polygon or rectangle region, optionally flips,
rotates, or rescales it, and hard-pastes it at a different location in the
same image. Splice takes the region from a donor image, optionally re-encodes
the donor patch as JPEG at a mismatched quality, shifts its illumination, and
feathers the seam; the feather alpha is blurred inside the mask only, so
pixels outside the region stay bitwise equal to the host.

A procedural source generator (soft gradient background, random shapes, band
limited texture noise) provides authentic imagery with no external corpus.
Full-size forgeries are cut into training windows by an overlap-slip grid:
window starts are pinned at both ends with jittered interior offsets, so the
windows always cover the whole image, and each window is randomly flipped
jointly with its mask.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import cv2
import numpy as np

from .errors import GenerationError

_BOUNDARY_KERNEL = np.ones((3, 3), np.uint8)


def boundary_from_mask(mask: np.ndarray, kernel_size: int = 3) -> np.ndarray:
    """Morphological gradient (dilate - erode) with outside-of-image = 0."""
    kernel = np.ones((kernel_size, kernel_size), np.uint8)
    mask = (mask > 0).astype(np.uint8)
    dilated = cv2.dilate(mask, kernel, borderType=cv2.BORDER_CONSTANT, borderValue=0)
    eroded = cv2.erode(mask, kernel, borderType=cv2.BORDER_CONSTANT, borderValue=0)
    return dilated - eroded


@dataclass
class GenOptions:
    size: int = 256
    area_bounds: Tuple[float, float] = (0.01, 0.60)
    region_fraction: Tuple[float, float] = (0.06, 0.28)
    max_retries: int = 40
    transforms: Tuple[str, ...] = (
        "identity", "hflip", "vflip", "rot90", "rot180", "rot270", "scale",
    )
    scale_range: Tuple[float, float] = (0.7, 1.3)
    donor_quality: Tuple[int, int] = (30, 60)
    illumination: Tuple[float, float] = (0.85, 1.15)
    feather_radius: int = 2
    source_margin: float = 0.5
    min_paste_contrast: float = 12.0


@dataclass
class SamplePair:
    """One training sample: image, region mask, derived boundary mask, provenance."""

    image: np.ndarray
    region_mask: np.ndarray
    boundary_mask: np.ndarray
    manipulation: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.image.shape[:2] != self.region_mask.shape:
            raise ValueError(
                f"image {self.image.shape} and mask {self.region_mask.shape} disagree"
            )
        if self.manipulation == "authentic" and self.region_mask.any():
            raise ValueError("authentic sample with nonempty mask")


def synth_source_image(seed: int, size: int = 256) -> np.ndarray:
    """Procedural authentic image: gradient background, shapes, texture noise.

    The composed background and shapes are defocus-blurred before the noise
    goes on, the way optics and demosaicing smooth real photographs; authentic
    content therefore never contains one-pixel step edges, while a hard paste
    does.
    """
    rng = np.random.default_rng(seed)
    coarse = rng.uniform(30.0, 225.0, (4, 4, 3)).astype(np.float32)
    canvas = cv2.resize(coarse, (size, size), interpolation=cv2.INTER_LINEAR)

    for _ in range(int(rng.integers(3, 7))):
        color = rng.uniform(20.0, 235.0, 3).astype(np.float32)
        kind = rng.integers(0, 3)
        if kind == 0:
            center = (int(rng.integers(0, size)), int(rng.integers(0, size)))
            radius = int(rng.integers(size // 16, size // 3))
            cv2.circle(canvas, center, radius, color.tolist(), -1)
        elif kind == 1:
            x0, y0 = rng.integers(0, size, 2)
            x1 = int(min(size - 1, x0 + rng.integers(size // 10, size // 2)))
            y1 = int(min(size - 1, y0 + rng.integers(size // 10, size // 2)))
            cv2.rectangle(canvas, (int(x0), int(y0)), (x1, y1), color.tolist(), -1)
        else:
            pts = rng.integers(0, size, (int(rng.integers(3, 7)), 2))
            cv2.fillPoly(canvas, [pts.astype(np.int32)], color.tolist())

    sigma = float(rng.uniform(1.0, 2.5))
    canvas = cv2.GaussianBlur(canvas, (0, 0), sigma)
    grain = rng.normal(0.0, 20.0, (size // 8, size // 8, 3)).astype(np.float32)
    canvas += cv2.resize(grain, (size, size), interpolation=cv2.INTER_LINEAR)
    canvas += rng.normal(0.0, 2.5, canvas.shape).astype(np.float32)
    return np.clip(np.rint(canvas), 0, 255).astype(np.uint8)


def _region_patch(rng: np.random.Generator, side: int) -> np.ndarray:
    """Binary uint8 patch mask: rectangle or star-convex polygon in a side^2 box."""
    patch = np.zeros((side, side), np.uint8)
    if rng.random() < 0.3:
        mh = int(rng.integers(side // 2, side + 1))
        mw = int(rng.integers(side // 2, side + 1))
        y0 = int(rng.integers(0, side - mh + 1))
        x0 = int(rng.integers(0, side - mw + 1))
        patch[y0:y0 + mh, x0:x0 + mw] = 1
        return patch
    n = int(rng.integers(4, 9))
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
    radii = rng.uniform(0.45, 0.5, n) * side
    cx = cy = side / 2.0
    pts = np.stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)], axis=1)
    cv2.fillPoly(patch, [np.rint(pts).astype(np.int32)], 1)
    return patch


def apply_patch_transform(
    img: np.ndarray, mask: np.ndarray, name: str, scale: float = 1.0
) -> Tuple[np.ndarray, np.ndarray]:
    """Transform a patch and its mask together; flips/rotations are exact."""
    if name == "identity":
        return img.copy(), mask.copy()
    if name == "hflip":
        return np.flip(img, axis=1).copy(), np.flip(mask, axis=1).copy()
    if name == "vflip":
        return np.flip(img, axis=0).copy(), np.flip(mask, axis=0).copy()
    if name in ("rot90", "rot180", "rot270"):
        k = {"rot90": 1, "rot180": 2, "rot270": 3}[name]
        return np.rot90(img, k).copy(), np.rot90(mask, k).copy()
    if name == "scale":
        h, w = mask.shape
        nh, nw = max(8, int(round(h * scale))), max(8, int(round(w * scale)))
        img_t = cv2.resize(img, (nw, nh), interpolation=cv2.INTER_LINEAR)
        mask_t = cv2.resize(mask, (nw, nh), interpolation=cv2.INTER_NEAREST)
        return img_t, mask_t
    raise GenerationError(f"unknown transform '{name}'")


def _check_min_size(img: np.ndarray, size: int, what: str) -> None:
    if img.shape[0] < size or img.shape[1] < size:
        raise GenerationError(
            f"{what} is {img.shape[1]}x{img.shape[0]}, needs at least {size}x{size}"
        )


def generate_copy_move(
    src: np.ndarray, rng_seed: int, opts: Optional[GenOptions] = None
) -> SamplePair:
    """Duplicate a region within ``src`` and paste it elsewhere (hard paste)."""
    opts = opts or GenOptions()
    _check_min_size(src, opts.size, "source image")
    rng = np.random.default_rng(rng_seed)
    h, w = src.shape[:2]

    for attempt in range(opts.max_retries):
        frac = rng.uniform(*opts.region_fraction)
        side = int(np.clip(np.sqrt(frac * h * w / 0.6), 12, min(h, w) - 1))
        patch_mask = _region_patch(rng, side)
        sy = int(rng.integers(0, h - side + 1))
        sx = int(rng.integers(0, w - side + 1))
        name = str(rng.choice(opts.transforms))
        scale = float(rng.uniform(*opts.scale_range)) if name == "scale" else 1.0
        patch_img = src[sy:sy + side, sx:sx + side]
        timg, tmask = apply_patch_transform(patch_img, patch_mask, name, scale)
        th, tw = tmask.shape
        if th >= h or tw >= w:
            continue
        py = int(rng.integers(0, h - th + 1))
        px = int(rng.integers(0, w - tw + 1))
        if name == "identity" and (py, px) == (sy, sx):
            continue
        area = float(tmask.sum()) / (h * w)
        if not (opts.area_bounds[0] <= area <= opts.area_bounds[1]):
            continue
        region = tmask > 0
        # Prefer placements where the paste visibly differs from what it
        # covers; relax on the last quarter of retries so generation always
        # terminates on images with little palette variation.
        covered = src[py:py + th, px:px + tw][region].astype(np.float32)
        contrast = float(np.abs(timg[region].astype(np.float32) - covered).mean())
        if attempt < (3 * opts.max_retries) // 4 and contrast < opts.min_paste_contrast:
            continue

        out = src.copy()
        out[py:py + th, px:px + tw][region] = timg[region]
        full_mask = np.zeros((h, w), np.uint8)
        full_mask[py:py + th, px:px + tw][region] = 1
        provenance = {
            "type": "copy-move",
            "seed": int(rng_seed),
            "source_xy": [sx, sy],
            "patch_side": side,
            "transform": name,
            "scale": scale,
            "paste_xy": [px, py],
        }
        return SamplePair(out, full_mask, boundary_from_mask(full_mask),
                          "copy-move", provenance)
    raise GenerationError(f"copy-move placement failed after {opts.max_retries} tries")


def _jpeg_roundtrip(img: np.ndarray, quality: int) -> np.ndarray:
    ok, buf = cv2.imencode(
        ".jpg", cv2.cvtColor(img, cv2.COLOR_RGB2BGR),
        [int(cv2.IMWRITE_JPEG_QUALITY), int(quality)],
    )
    if not ok:
        raise GenerationError(f"JPEG encode failed at quality {quality}")
    return cv2.cvtColor(cv2.imdecode(buf, cv2.IMREAD_COLOR), cv2.COLOR_BGR2RGB)


def generate_splice(
    src: np.ndarray,
    donor: np.ndarray,
    rng_seed: int,
    opts: Optional[GenOptions] = None,
) -> SamplePair:
    """Paste a donor-image region into ``src`` with quality/illumination mismatch.

    The seam feather alpha is a blurred mask multiplied by the mask itself, so
    everything outside the region stays bitwise equal to the host image.
    """
    opts = opts or GenOptions()
    _check_min_size(src, opts.size, "host image")
    _check_min_size(donor, opts.size, "donor image")
    rng = np.random.default_rng(rng_seed)
    h, w = src.shape[:2]
    dh, dw = donor.shape[:2]

    for attempt in range(opts.max_retries):
        frac = rng.uniform(*opts.region_fraction)
        side = int(np.clip(np.sqrt(frac * h * w / 0.6), 12, min(dh, dw, h, w) - 1))
        patch_mask = _region_patch(rng, side)
        dy = int(rng.integers(0, dh - side + 1))
        dx = int(rng.integers(0, dw - side + 1))
        py = int(rng.integers(0, h - side + 1))
        px = int(rng.integers(0, w - side + 1))
        area = float(patch_mask.sum()) / (h * w)
        if not (opts.area_bounds[0] <= area <= opts.area_bounds[1]):
            continue

        patch = donor[dy:dy + side, dx:dx + side].copy()
        quality = int(rng.integers(opts.donor_quality[0], opts.donor_quality[1] + 1))
        patch = _jpeg_roundtrip(patch, quality)
        illum = float(rng.uniform(*opts.illumination))
        patch = np.clip(patch.astype(np.float64) * illum, 0, 255)

        region = patch_mask > 0
        covered = src[py:py + side, px:px + side][region].astype(np.float64)
        contrast = float(np.abs(patch[region] - covered).mean())
        if attempt < (3 * opts.max_retries) // 4 and contrast < opts.min_paste_contrast:
            continue

        maskf = patch_mask.astype(np.float64)
        radius = opts.feather_radius
        if radius > 0:
            k = 2 * radius + 1
            alpha = cv2.GaussianBlur(maskf, (k, k), 0) * maskf
        else:
            alpha = maskf
        alpha3 = alpha[..., None]
        out = src.copy()
        window = out[py:py + side, px:px + side].astype(np.float64)
        blended = window * (1.0 - alpha3) + patch * alpha3
        out[py:py + side, px:px + side] = np.clip(np.rint(blended), 0, 255).astype(np.uint8)

        full_mask = np.zeros((h, w), np.uint8)
        full_mask[py:py + side, px:px + side] = patch_mask
        provenance = {
            "type": "splice",
            "seed": int(rng_seed),
            "donor_xy": [dx, dy],
            "patch_side": side,
            "donor_quality": quality,
            "illumination": illum,
            "feather_radius": radius,
            "paste_xy": [px, py],
        }
        return SamplePair(out, full_mask, boundary_from_mask(full_mask),
                          "splice", provenance)
    raise GenerationError(f"splice placement failed after {opts.max_retries} tries")


def _grid_starts(extent: int, window: int, stride: int, rng: np.random.Generator) -> List[int]:
    """Window starts: regular grid pinned at both ends, interior jittered.

    Jitter is capped at (window - stride) // 2 so consecutive starts stay at
    most one window apart, which keeps coverage complete.
    """
    if extent <= window:
        return [0]
    last = extent - window
    starts = list(range(0, last, stride))
    if starts[-1] != last:
        starts.append(last)
    jitter = max(0, (window - stride) // 2)
    out = []
    for i, s in enumerate(starts):
        if 0 < i < len(starts) - 1 and jitter > 0:
            s = int(np.clip(s + rng.integers(-jitter, jitter + 1), 0, last))
        out.append(s)
    return out


def extract_blocks(
    img: np.ndarray,
    mask: np.ndarray,
    stride: int,
    window: int = 256,
    seed: int = 0,
    manipulation: str = "authentic",
    provenance: Optional[dict] = None,
) -> List[SamplePair]:
    """Overlap-slip crops with joint random flips; aligned mask windows.

    Images smaller than the window are resized up (nearest for the mask) and
    returned as a single block.
    """
    rng = np.random.default_rng(seed)
    h, w = mask.shape
    if h < window or w < window:
        img = cv2.resize(img, (window, window), interpolation=cv2.INTER_LINEAR)
        mask = cv2.resize(mask, (window, window), interpolation=cv2.INTER_NEAREST)
        h = w = window

    blocks = []
    for y in _grid_starts(h, window, stride, rng):
        for x in _grid_starts(w, window, stride, rng):
            crop = img[y:y + window, x:x + window]
            mcrop = mask[y:y + window, x:x + window]
            flip_h = bool(rng.integers(0, 2))
            flip_v = bool(rng.integers(0, 2))
            if flip_h:
                crop = np.flip(crop, axis=1)
                mcrop = np.flip(mcrop, axis=1)
            if flip_v:
                crop = np.flip(crop, axis=0)
                mcrop = np.flip(mcrop, axis=0)
            crop = crop.copy()
            mcrop = (mcrop > 0).astype(np.uint8)
            tag = manipulation if mcrop.any() else "authentic"
            prov = dict(provenance or {})
            prov.update({"window_xy": [int(x), int(y)],
                         "flip_h": flip_h, "flip_v": flip_v})
            blocks.append(SamplePair(crop, mcrop, boundary_from_mask(mcrop), tag, prov))
    return blocks


def _generate_sample(index: int, base_seed: int, opts: GenOptions) -> SamplePair:
    """One corpus sample: forge at 1.5x window size, then pick a valid window."""
    manipulation = "copy-move" if index % 2 == 0 else "splice"
    source_size = int(round(opts.size * (1.0 + opts.source_margin)))
    lo, hi = opts.area_bounds

    for attempt in range(opts.max_retries):
        seed = base_seed + 1_000_003 * index + 7_919 * attempt
        src = synth_source_image(seed * 2 + 1, source_size)
        src_opts = GenOptions(**{**asdict(opts), "size": min(opts.size, source_size)})
        if manipulation == "copy-move":
            pair = generate_copy_move(src, seed, src_opts)
        else:
            donor = synth_source_image(seed * 2 + 2, source_size)
            pair = generate_splice(src, donor, seed, src_opts)
        blocks = extract_blocks(
            pair.image, pair.region_mask, stride=opts.size // 2, window=opts.size,
            seed=seed, manipulation=manipulation, provenance=pair.provenance,
        )
        valid = [
            b for b in blocks
            if lo <= b.region_mask.mean() <= hi and b.manipulation == manipulation
        ]
        if valid:
            return valid[int(np.random.default_rng(seed).integers(0, len(valid)))]
    raise GenerationError(
        f"no valid window for sample {index} after {opts.max_retries} attempts"
    )


def build_corpus(
    root,
    count: int,
    opts: Optional[GenOptions] = None,
    seed: int = 0,
    train_fraction: float = 0.8,
) -> List[dict]:
    """Write a corpus to disk: images/, masks/, meta/ plus an index.csv.

    Manipulation types alternate, so both land at exactly half the corpus;
    the first ``train_fraction`` of samples form the train split, the rest
    the test split. Returns the index rows.
    """
    opts = opts or GenOptions()
    root = Path(root)
    for sub in ("images", "masks", "meta"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    n_train = int(round(count * train_fraction))
    rows = []
    for i in range(count):
        pair = _generate_sample(i, seed, opts)
        name = f"{i:06d}"
        image_rel = f"images/{name}.png"
        mask_rel = f"masks/{name}.png"
        cv2.imwrite(str(root / image_rel), cv2.cvtColor(pair.image, cv2.COLOR_RGB2BGR))
        cv2.imwrite(str(root / mask_rel), pair.region_mask * 255)
        meta = {
            "manipulation": pair.manipulation,
            "seed": seed,
            "provenance": pair.provenance,
        }
        (root / "meta" / f"{name}.json").write_text(json.dumps(meta, indent=1))
        rows.append({
            "id": name,
            "image": image_rel,
            "mask": mask_rel,
            "manipulation": pair.manipulation,
            "split": "train" if i < n_train else "test",
        })

    with open(root / "index.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    return rows
