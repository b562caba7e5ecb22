import json
import random

import pytest

LETTERS = "abcdefghijklmnopqrstuvwxyz"


def leftmost_replace(text, pattern, replacement):
    at = text.find(pattern)
    if at < 0:
        return text
    return text[:at] + replacement + text[at + len(pattern):]


def count_overlapping(text, pattern):
    count, start = 0, 0
    while (at := text.find(pattern, start)) >= 0:
        count, start = count + 1, at + 1
    return count


def make_records(count, seed, pattern_len=2, input_len=8, noop_share=0.3, instructions=None):
    """Self-contained rewrite examples (no dependency on the generator package)."""
    rng = random.Random(seed)
    if instructions is None:
        instructions = []
        while len(instructions) < max(4, count // 8):
            pattern = "".join(rng.choice(LETTERS[:6]) for _ in range(pattern_len))
            replacement = "".join(rng.choice(LETTERS[:6]) for _ in range(pattern_len))
            if all(pattern != p for p, _ in instructions):
                instructions.append((pattern, replacement))
    records = []
    while len(records) < count:
        pattern, replacement = instructions[len(records) % len(instructions)]
        want_noop = rng.random() < noop_share
        text = "".join(rng.choice(LETTERS[:6]) for _ in range(input_len))
        if want_noop != (pattern not in text):
            continue
        records.append(
            {
                "pattern": pattern,
                "replacement": replacement,
                "input": text,
                "target": leftmost_replace(text, pattern, replacement),
                "is_noop": pattern not in text,
                "occurrences": count_overlapping(text, pattern),
            }
        )
    return records


@pytest.fixture()
def tiny_train_file(tmp_path):
    records = make_records(64, seed=13)
    path = tmp_path / "train.jsonl"
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
    return path, records
