"""JSONL loading and batching for rewrite examples."""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch.utils.data import Dataset

from rewritetrainer.vocab import PAD, encode_example

IGNORE_INDEX = -100


def load_records(path: Path, limit: int | None = None) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                records.append(json.loads(line))
                if limit is not None and len(records) >= limit:
                    break
    if not records:
        raise ValueError(f"{path}: no examples")
    return records


class RewriteDataset(Dataset):
    """Encoded examples with per-example prompt lengths (loss starts after <OUT>)."""

    def __init__(self, records: list[dict]):
        self.encoded = [encode_example(r) for r in records]
        # Prompt covers everything through <OUT>: 3 markers + three fields + <OUT>.
        self.prompt_lens = [
            3 + len(r["pattern"]) + len(r["replacement"]) + len(r["input"]) + 1 for r in records
        ]

    def __len__(self) -> int:
        return len(self.encoded)

    def __getitem__(self, index: int) -> tuple[list[int], int]:
        return self.encoded[index], self.prompt_lens[index]


def collate(batch: list[tuple[list[int], int]]) -> tuple[torch.Tensor, torch.Tensor]:
    """Pad to the batch max length; labels mask the prompt and padding.

    Returns (tokens, labels) where labels[t] is the target for position t's
    prediction of token t+1 (already shifted).
    """
    width = max(len(ids) for ids, _ in batch)
    tokens = torch.full((len(batch), width), PAD, dtype=torch.long)
    labels = torch.full((len(batch), width - 1), IGNORE_INDEX, dtype=torch.long)
    for row, (ids, prompt_len) in enumerate(batch):
        encoded = torch.tensor(ids, dtype=torch.long)
        tokens[row, : len(ids)] = encoded
        # Positions prompt_len-1 .. len(ids)-2 predict the target tokens and <EOS>.
        labels[row, prompt_len - 1 : len(ids) - 1] = encoded[prompt_len:]
    return tokens, labels
