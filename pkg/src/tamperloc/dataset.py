"""Corpus manifest reader and torch dataset over generated samples."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Optional, Tuple

import cv2
import numpy as np
import torch
from torch.utils.data import Dataset

from .errors import DataError


class Corpus:
    """On-disk corpus: images/, masks/, meta/ plus an index.csv manifest."""

    def __init__(self, root):
        self.root = Path(root)
        index = self.root / "index.csv"
        if not index.is_file():
            raise DataError(f"no index.csv under {self.root}")
        with open(index, newline="") as fh:
            self._rows = list(csv.DictReader(fh))
        if not self._rows:
            raise DataError(f"empty manifest {index}")

    def rows(self, split: Optional[str] = None) -> List[dict]:
        if split is None:
            return list(self._rows)
        return [r for r in self._rows if r["split"] == split]

    def load_sample(self, row: dict) -> Tuple[np.ndarray, np.ndarray]:
        """(image HWC uint8 RGB, mask HW uint8 in {0,1}) for a manifest row."""
        img_bgr = cv2.imread(str(self.root / row["image"]), cv2.IMREAD_COLOR)
        mask = cv2.imread(str(self.root / row["mask"]), cv2.IMREAD_GRAYSCALE)
        if img_bgr is None or mask is None:
            raise DataError(f"unreadable sample {row.get('id')} under {self.root}")
        return cv2.cvtColor(img_bgr, cv2.COLOR_BGR2RGB), (mask > 127).astype(np.uint8)


class TamperDataset(Dataset):
    """Yields (image [3,H,W] float32 pixel-255, mask [1,H,W] float32 {0,1})."""

    def __init__(self, root, split: str = "train", input_size: Optional[int] = None):
        self.corpus = Corpus(root)
        self.samples = self.corpus.rows(split)
        if not self.samples:
            raise DataError(f"split '{split}' is empty in {root}")
        self.input_size = input_size

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, idx: int):
        img, mask = self.corpus.load_sample(self.samples[idx])
        if self.input_size and img.shape[0] != self.input_size:
            size = (self.input_size, self.input_size)
            img = cv2.resize(img, size, interpolation=cv2.INTER_LINEAR)
            mask = cv2.resize(mask, size, interpolation=cv2.INTER_NEAREST)
        image = torch.from_numpy(img.copy()).permute(2, 0, 1).float()
        target = torch.from_numpy(mask.copy()).unsqueeze(0).float()
        return image, target
