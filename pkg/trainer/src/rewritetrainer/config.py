"""Training configuration: flat TOML, strict keys, mandatory seed."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass
class TrainConfig:
    seed: int
    train_file: str
    out_dir: str = "trainer_out"
    layers: int = 6
    heads: int = 4
    hidden: int = 256
    learning_rate: float = 1e-3
    epochs: int = 10
    batch_size: int = 64
    max_len: int = 160
    max_steps: Optional[int] = None
    max_examples: Optional[int] = None
    device: str = "cpu"
    log_every: int = 50

    def __post_init__(self) -> None:
        if self.hidden % self.heads != 0:
            raise ValueError("hidden size must be divisible by head count")
        for name in ("layers", "heads", "hidden", "epochs", "batch_size", "max_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def load_train_config(path: Path) -> TrainConfig:
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    known = {f.name for f in fields(TrainConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown config key(s): {unknown}")
    missing = [name for name in ("seed", "train_file") if name not in raw]
    if missing:
        raise ValueError(f"config must declare: {missing}")
    return TrainConfig(**raw)
