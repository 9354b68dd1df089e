"""Seeded SGD training loop with per-step CSV logging and checkpointing."""

from __future__ import annotations

import csv
import json
import random

import numpy as np
import torch
from torch.utils.data import DataLoader

from .boundary import make_boundary_gt
from .config import RunConfig, dump_config
from .dataset import TamperDataset
from .errors import NumericsError
from .losses import total_loss
from .network import TamperNet, save_checkpoint


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)


def train(config: RunConfig) -> dict:
    """Train per config; returns a summary dict with paths and loss endpoints.

    Deterministic for a fixed config and seed: single-worker loading, seeded
    shuffle generator, seeded init. A non-finite loss aborts with a crash
    dump next to the outputs.
    """
    seed_everything(config.seed)
    out = config.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    dump_config(config, out / "config.txt")

    dataset = TamperDataset(config.corpus, "train", config.input_size)
    batch = max(1, min(config.batch_size, len(dataset)))
    # a lone sample in the last batch breaks BatchNorm's per-batch statistics
    drop_last = len(dataset) > batch and len(dataset) % batch == 1
    generator = torch.Generator()
    generator.manual_seed(config.seed)
    loader = DataLoader(
        dataset, batch_size=batch, shuffle=True,
        generator=generator, num_workers=0, drop_last=drop_last,
    )

    model = TamperNet(config.network_config())
    model.train()
    optimizer = torch.optim.SGD(
        model.parameters(), lr=config.lr,
        momentum=config.momentum, weight_decay=config.weight_decay,
    )

    log_path = out / "train_log.csv"
    ckpt_path = out / "checkpoint.pt"
    step = 0
    initial = final = None
    try:
        with open(log_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "step", "total", "region", "boundary", "aware"])
            for epoch in range(config.epochs):
                for images, masks in loader:
                    edges = make_boundary_gt(masks)
                    bundle = total_loss(model(images), masks, edges, config.lambdas)
                    optimizer.zero_grad()
                    bundle.total.backward()
                    optimizer.step()
                    step += 1
                    vals = [bundle.total.item(), bundle.region.item(),
                            bundle.boundary.item(), bundle.aware.item()]
                    writer.writerow([epoch, step] + [f"{v:.8f}" for v in vals])
                    if initial is None:
                        initial = vals[0]
                    final = vals[0]
                    if config.log_every and step % config.log_every == 0:
                        print(f"epoch {epoch} step {step} total {vals[0]:.4f}", flush=True)
                    if config.checkpoint_every and step % config.checkpoint_every == 0:
                        save_checkpoint(model, ckpt_path, {"step": step, "epoch": epoch})
    except NumericsError as exc:
        (out / "crash.json").write_text(json.dumps(
            {"step": step, "error": str(exc)}, indent=1))
        raise

    save_checkpoint(model, ckpt_path, {"step": step, "epochs": config.epochs})
    return {
        "steps": step,
        "initial_loss": initial,
        "final_loss": final,
        "checkpoint": str(ckpt_path),
        "log": str(log_path),
        "output": str(out),
    }
