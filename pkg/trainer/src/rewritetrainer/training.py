"""Training loop: AdamW with a linearly decaying learning rate, loss on the
tokens after <OUT> only, greedy decoding everywhere downstream."""

from __future__ import annotations

import json
import time
from pathlib import Path

import torch
from torch import nn
from torch.utils.data import DataLoader

from rewritetrainer.config import TrainConfig
from rewritetrainer.data import IGNORE_INDEX, RewriteDataset, collate, load_records
from rewritetrainer.model import CharTransformer

CHECKPOINT_FILE = "checkpoint.pt"
LOG_FILE = "training_log.json"


def build_model(config: TrainConfig) -> CharTransformer:
    return CharTransformer(
        layers=config.layers, heads=config.heads, hidden=config.hidden, max_len=config.max_len
    )


def train(config: TrainConfig) -> Path:
    """Train on config.train_file; returns the checkpoint path."""
    torch.manual_seed(config.seed)
    device = torch.device(config.device)
    records = load_records(Path(config.train_file), limit=config.max_examples)
    dataset = RewriteDataset(records)
    loader = DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=True,
        collate_fn=collate,
        generator=torch.Generator().manual_seed(config.seed),
        drop_last=False,
    )
    model = build_model(config).to(device)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    steps_per_epoch = len(loader)
    total_steps = steps_per_epoch * config.epochs
    if config.max_steps is not None:
        total_steps = min(total_steps, config.max_steps)
    schedule = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: max(0.0, 1.0 - step / max(1, total_steps))
    )

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    losses: list[float] = []
    started = time.time()
    step = 0
    model.train()
    for epoch in range(config.epochs):
        for tokens, labels in loader:
            tokens = tokens.to(device)
            labels = labels.to(device)
            logits = model(tokens)[:, :-1, :]
            loss = nn.functional.cross_entropy(
                logits.reshape(-1, logits.shape[-1]), labels.reshape(-1),
                ignore_index=IGNORE_INDEX,
            )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            schedule.step()
            losses.append(float(loss.item()))
            step += 1
            if config.log_every and step % config.log_every == 0:
                recent = sum(losses[-config.log_every:]) / min(config.log_every, len(losses))
                print(
                    f"step {step}/{total_steps} epoch {epoch + 1} "
                    f"loss {recent:.4f} elapsed {time.time() - started:.0f}s",
                    flush=True,
                )
            if config.max_steps is not None and step >= config.max_steps:
                break
        if config.max_steps is not None and step >= config.max_steps:
            break

    checkpoint_path = out_dir / CHECKPOINT_FILE
    torch.save(
        {
            "model_state": model.state_dict(),
            "arch": {
                "layers": config.layers, "heads": config.heads,
                "hidden": config.hidden, "max_len": config.max_len,
            },
            "seed": config.seed,
        },
        checkpoint_path,
    )
    (out_dir / LOG_FILE).write_text(
        json.dumps(
            {
                "steps": step,
                "epochs": config.epochs,
                "train_file": str(config.train_file),
                "examples": len(dataset),
                "loss_per_step": losses,
                "wall_seconds": time.time() - started,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return checkpoint_path


def load_checkpoint(path: Path, device: str = "cpu") -> CharTransformer:
    payload = torch.load(path, map_location=device)
    arch = payload["arch"]
    model = CharTransformer(
        layers=arch["layers"], heads=arch["heads"], hidden=arch["hidden"], max_len=arch["max_len"]
    )
    model.load_state_dict(payload["model_state"])
    model.to(device)
    model.eval()
    return model
