"""Independent verification pass over emitted dataset files.

Re-derives every per-example fact from scratch (occurrence counts by direct
enumeration, targets by scan-and-splice) instead of trusting the generator,
and cross-checks dataset-level promises against the manifest: per-instruction
counts, no-op shares, and train/test instruction disjointness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

REQUIRED_FIELDS = ("pattern", "replacement", "input", "target", "is_noop", "occurrences")


class CheckError(AssertionError):
    """A dataset file violates a generator invariant."""


@dataclass
class CheckStats:
    examples: int = 0
    noops: int = 0
    per_pattern: dict[str, int] = field(default_factory=dict)
    noops_per_pattern: dict[str, int] = field(default_factory=dict)


def enumerate_count(text: str, pattern: str) -> int:
    """Occurrence count by slice comparison at every offset (overlap-aware)."""
    m = len(pattern)
    return sum(1 for i in range(len(text) - m + 1) if text[i:i + m] == pattern)


def enumerate_leftmost_replace(text: str, pattern: str, replacement: str) -> str | None:
    m = len(pattern)
    for i in range(len(text) - m + 1):
        if text[i:i + m] == pattern:
            return text[:i] + replacement + text[i + m:]
    return None


def check_example(record: dict, line_no: int, path: Path) -> None:
    for key in REQUIRED_FIELDS:
        if key not in record:
            raise CheckError(f"{path}:{line_no}: missing field {key!r}")
    pattern = record["pattern"]
    text = record["input"]
    target = record["target"]
    occurrences = record["occurrences"]
    counted = enumerate_count(text, pattern)
    if counted != occurrences:
        raise CheckError(
            f"{path}:{line_no}: recorded occurrences {occurrences} but counted {counted}"
        )
    if record["is_noop"]:
        if occurrences != 0:
            raise CheckError(f"{path}:{line_no}: no-op with occurrences {occurrences}")
        if target != text:
            raise CheckError(f"{path}:{line_no}: no-op target differs from input")
    else:
        if occurrences < 1:
            raise CheckError(f"{path}:{line_no}: has-op without an occurrence")
        expected = enumerate_leftmost_replace(text, pattern, record["replacement"])
        if target != expected:
            raise CheckError(f"{path}:{line_no}: target is not the leftmost replacement")


def check_file(path: Path) -> CheckStats:
    """Validate every example in one JSONL file."""
    stats = CheckStats()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            record = json.loads(line)
            check_example(record, line_no, path)
            stats.examples += 1
            stats.per_pattern[record["pattern"]] = stats.per_pattern.get(record["pattern"], 0) + 1
            if record["is_noop"]:
                stats.noops += 1
                stats.noops_per_pattern[record["pattern"]] = (
                    stats.noops_per_pattern.get(record["pattern"], 0) + 1
                )
    return stats


def check_dataset(dataset_dir: Path) -> dict[str, CheckStats]:
    """Validate a generated dataset directory against its manifest."""
    dataset_dir = Path(dataset_dir)
    manifest = json.loads((dataset_dir / "manifest.json").read_text(encoding="utf-8"))
    noop_fraction = manifest["config"]["noop_fraction"]

    train_patterns = {i["pattern"] for i in manifest["train_instructions"]}
    test_patterns = {i["pattern"] for i in manifest["test_instructions"]}
    overlap = train_patterns & test_patterns
    if overlap:
        raise CheckError(f"train/test instruction overlap: {sorted(overlap)[:3]}")

    stats: dict[str, CheckStats] = {}
    for name, patterns in (("train.jsonl", train_patterns), ("test.jsonl", test_patterns)):
        file_stats = check_file(dataset_dir / name)
        stray = set(file_stats.per_pattern) - patterns
        if stray:
            raise CheckError(f"{name}: instruction(s) not in the manifest pool: {sorted(stray)[:3]}")
        for pattern, count in file_stats.per_pattern.items():
            want = noop_fraction * count
            have = file_stats.noops_per_pattern.get(pattern, 0)
            if abs(have - want) > 1.0:
                raise CheckError(
                    f"{name}: instruction {pattern!r} has {have} no-ops, expected about {want:.1f}"
                )
        stats[name] = file_stats

    declared = manifest["per_instruction_counts"]
    train_stats = stats["train.jsonl"]
    if train_stats.per_pattern != {k: v for k, v in declared.items()}:
        raise CheckError("per-instruction counts disagree with the manifest")
    if sum(declared.values()) != train_stats.examples:
        raise CheckError("manifest counts do not sum to the train example count")
    return stats
