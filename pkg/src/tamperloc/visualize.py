"""PNG emitters: probability maps, tamper overlays, frequency-weight heatmaps."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

COMPONENT_NAMES = ("Y", "Cb", "Cr")


def save_prob_png(prob: np.ndarray, path) -> None:
    """8-bit grayscale PNG, value = round(255 * p)."""
    arr = np.rint(255.0 * np.clip(prob, 0.0, 1.0)).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def save_overlay_png(prob: np.ndarray, threshold: float, path) -> None:
    """RGBA overlay: red wherever tampering is predicted, transparent elsewhere.

    Alpha is round(255 * p) above the threshold and exactly 0 at or below it,
    so compositing over the input image highlights only predicted pixels.
    """
    alpha = np.rint(255.0 * np.clip(prob, 0.0, 1.0)).astype(np.uint8)
    alpha[prob <= threshold] = 0
    rgba = np.zeros((*prob.shape, 4), np.uint8)
    rgba[..., 0] = 255
    rgba[..., 3] = alpha
    Image.fromarray(rgba, mode="RGBA").save(path)


def channel_weight_grids(alpha: np.ndarray, block_size: int = 8) -> np.ndarray:
    """Reshape the K gate values into per-component (u, v) grids [3, P, P].

    Channel c * P^2 + u * P + v of the frequency volume maps to cell (u, v)
    of component c, so a grid cell's flat index within its component runs
    0..P^2-1 in row-major order.
    """
    per = block_size * block_size
    if alpha.size != 3 * per:
        raise ValueError(f"expected {3 * per} weights, got {alpha.size}")
    return alpha.reshape(3, block_size, block_size)


def save_weight_heatmaps(alpha: np.ndarray, path, block_size: int = 8) -> None:
    """Three-panel heatmap of per-channel gate values, cells indexed 0..P^2-1."""
    grids = channel_weight_grids(alpha, block_size)
    fig, axes = plt.subplots(1, 3, figsize=(4 * 3, 4))
    for comp, (ax, grid) in enumerate(zip(axes, grids)):
        im = ax.imshow(grid, cmap="viridis", vmin=0.0, vmax=1.0)
        ax.set_title(COMPONENT_NAMES[comp])
        ax.set_xticks([])
        ax.set_yticks([])
        for u in range(block_size):
            for v in range(block_size):
                ax.text(v, u, str(u * block_size + v), ha="center", va="center",
                        color="white", fontsize=6)
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
