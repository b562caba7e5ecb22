"""Greedy prediction over a reference JSONL, emitting eval-ready records."""

from __future__ import annotations

import json
from pathlib import Path

import torch

from rewritetrainer.data import load_records
from rewritetrainer.model import CharTransformer
from rewritetrainer.vocab import EOS, decode_text, encode_prompt


def predict_records(
    model: CharTransformer,
    records: list[dict],
    batch_size: int = 256,
    device: str = "cpu",
) -> list[str]:
    """Greedy-decoded prediction strings, aligned with the record order."""
    prompts = [encode_prompt(r) for r in records]
    predictions: list[str | None] = [None] * len(records)
    by_length: dict[int, list[int]] = {}
    for i, prompt in enumerate(prompts):
        by_length.setdefault(len(prompt), []).append(i)
    for length, indices in sorted(by_length.items()):
        if length >= model.max_len:
            raise ValueError(f"prompt length {length} does not fit the model (max_len {model.max_len})")
        # Targets are at most |input| + |replacement| characters, plus <EOS>.
        longest_target = max(len(records[i]["input"]) + len(records[i]["replacement"]) for i in indices)
        max_new = min(model.max_len - length, longest_target + 2)
        for start in range(0, len(indices), batch_size):
            chunk = indices[start:start + batch_size]
            batch = torch.tensor([prompts[i] for i in chunk], dtype=torch.long, device=device)
            outputs = model.greedy_complete(batch, max_new=max_new, eos_id=EOS)
            for i, ids in zip(chunk, outputs):
                predictions[i] = decode_text(ids)
    return predictions  # type: ignore[return-value]


def predict_file(
    model: CharTransformer,
    reference_path: Path,
    out_path: Path,
    batch_size: int = 256,
    device: str = "cpu",
) -> Path:
    records = load_records(reference_path)
    predictions = predict_records(model, records, batch_size=batch_size, device=device)
    with open(out_path, "w", encoding="utf-8") as handle:
        for example_id, prediction in enumerate(predictions):
            handle.write(json.dumps({"example_id": example_id, "prediction": prediction}) + "\n")
    return out_path
