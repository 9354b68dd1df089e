"""Run configuration: flat key=value files with one-to-one CLI override flags.

Every key in the file corresponds to a RunConfig field and to a CLI flag of
the same name (dashes for underscores). Precedence is defaults < file < CLI.
Optimizer defaults follow the training recipe this system is built around:
SGD, lr 0.01, momentum 0.9, weight decay 5e-4, loss weights 0.05/0.05/0.9.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Tuple

from .errors import ConfigError
from .network import NetworkConfig

OUTPUT_ROOT_ENV = "TAMPERLOC_OUTPUT_ROOT"


@dataclass
class RunConfig:
    # paths
    corpus: str = "corpus"
    output: str = "run"
    checkpoint: str = ""
    inputs: str = ""
    split: str = "test"
    # network topology
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
    # optimization
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    lambda_region: float = 0.05
    lambda_boundary: float = 0.05
    lambda_aware: float = 0.9
    batch_size: int = 8
    epochs: int = 10
    seed: int = 0
    checkpoint_every: int = 0
    log_every: int = 10
    # evaluation / prediction
    threshold: float = 0.5
    heatmaps: bool = False
    # data generation
    count: int = 100
    train_fraction: float = 0.8

    @property
    def lambdas(self) -> Tuple[float, float, float]:
        return (self.lambda_region, self.lambda_boundary, self.lambda_aware)

    def network_config(self) -> NetworkConfig:
        return NetworkConfig(
            backbone=self.backbone,
            input_size=self.input_size,
            freq_out_channels=self.freq_out_channels,
            boundary_channels=self.boundary_channels,
            boundary_units=self.boundary_units,
            block_size=self.block_size,
            reduction=self.reduction,
            use_rgb=self.use_rgb,
            use_frequency=self.use_frequency,
            use_cross_fusion=self.use_cross_fusion,
            use_boundary=self.use_boundary,
        )

    def output_dir(self) -> Path:
        """Output path, rooted at $TAMPERLOC_OUTPUT_ROOT when set and relative."""
        out = Path(self.output)
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not out.is_absolute():
            out = Path(root) / out
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key '{key}'")
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if kind == "bool" or kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key '{key}' expects a boolean, got '{raw}'")
    try:
        if kind == "int" or kind is int:
            return int(raw)
        if kind == "float" or kind is float:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"config key '{key}': {exc}") from None
    return raw


def parse_config_file(path) -> dict:
    """Read `key = value` lines; '#' starts a comment, blank lines ignored."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{line}'")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, raw)
    return values


def build_config(file: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Merge defaults, a config file, and CLI overrides (increasing precedence)."""
    merged = {}
    if file:
        merged.update(parse_config_file(file))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        merged[key] = _coerce(key, str(value)) if isinstance(value, str) else value
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key '{key}'")
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def dump_config(config: RunConfig, path) -> None:
    """Persist as the same flat key=value format the parser reads."""
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in fields(RunConfig)]
    Path(path).write_text("\n".join(lines) + "\n")
