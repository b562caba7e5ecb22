"""Deterministic generation of single-rule rewrite datasets.

Each dataset pairs a pool of train instructions (rewrite rules x -> y) with a
disjoint pool of held-out test instructions, and emits JSON-lines examples:
an input sequence containing the instruction pattern a controlled number of
times, and the target produced by leftmost replacement (or the unchanged
input for no-ops). All sampling flows through named substreams derived from
(seed, block index), so output bytes are identical for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Iterable, Optional, Sequence

from rewritebench.engine import Rule, apply_rule_once

LOWERCASE = "abcdefghijklmnopqrstuvwxyz"

SEMANTIC_KINDS = ("unconstrained", "repeated", "periodic", "mirror")

TRAIN_FILE = "train.jsonl"
TEST_FILE = "test.jsonl"
MANIFEST_FILE = "manifest.json"

_EMBED_ATTEMPTS = 500
_DISTINCT_ATTEMPT_FACTOR = 200


class GenerationError(ValueError):
    """Raised when a dataset configuration cannot be satisfied."""


def substream(seed: int, *path) -> random.Random:
    """Independent RNG derived from (seed, path); order-free across blocks."""
    material = json.dumps([seed, *path]).encode()
    return random.Random(hashlib.sha256(material).digest())


def count_occurrences(text: str, pattern: str) -> int:
    """Overlap-aware occurrence count (offsets may overlap)."""
    if not pattern:
        raise ValueError("pattern must be non-empty")
    count = 0
    start = 0
    while True:
        idx = text.find(pattern, start)
        if idx < 0:
            return count
        count += 1
        start = idx + 1


@dataclass(frozen=True)
class Instruction:
    pattern: str
    replacement: str

    def __post_init__(self) -> None:
        if not self.pattern:
            raise ValueError("instruction pattern must be non-empty")


@dataclass(frozen=True)
class Example:
    instruction: Instruction
    input: str
    target: str
    is_noop: bool
    occurrences: int


@dataclass(frozen=True)
class SemanticClass:
    """Structural constraint on generated patterns.

    repeated(k): each character repeated k times in a row (aaabbbccc, k=3).
    periodic(k): a unit repeated k times (abcabc, k=2).
    mirror(k): alternating unit / reversed unit blocks (abccbaabc, k=3).
    """

    kind: str = "unconstrained"
    k: int = 1

    def __post_init__(self) -> None:
        if self.kind not in SEMANTIC_KINDS:
            raise ValueError(f"unknown semantic class kind {self.kind!r}")
        if self.kind != "unconstrained" and self.k < 1:
            raise ValueError("constrained classes require k >= 1")

    def check_length(self, length: int) -> None:
        if self.kind != "unconstrained" and length % self.k != 0:
            raise GenerationError(
                f"pattern length {length} is not divisible by k={self.k} for class {self.kind}"
            )

    def space_size(self, length: int, alphabet_size: int = len(LOWERCASE)) -> int:
        """Number of distinct patterns of this shape and length."""
        if self.kind == "unconstrained":
            return alphabet_size ** length
        self.check_length(length)
        return alphabet_size ** (length // self.k)


@dataclass(frozen=True)
class PowerLawSpec:
    """Rank weights proportional to rank ** (-1 / shape); larger shape is
    closer to uniform, smaller shape is more head-heavy."""

    shape: float

    def __post_init__(self) -> None:
        if not self.shape > 0:
            raise ValueError("power-law shape must be positive")

    def weights(self, count: int) -> list[float]:
        exponent = -1.0 / self.shape
        return [float(rank) ** exponent for rank in range(1, count + 1)]


@dataclass(frozen=True)
class DatasetConfig:
    seed: int
    num_instructions: int
    examples_per_instruction: Optional[int] = None
    total_examples: Optional[int] = None
    input_length: int = 50
    pattern_length: int = 20
    replacement_length: Optional[int] = None
    noop_fraction: float = 0.0
    occurrence_set: tuple[int, ...] = (1,)
    semantic_class: SemanticClass = SemanticClass()
    constrain_replacement: bool = False
    power_law: Optional[PowerLawSpec] = None
    holdout_instructions: int = 100
    test_examples: int = 100_000

    def __post_init__(self) -> None:
        if self.num_instructions < 1 or self.holdout_instructions < 1:
            raise ValueError("instruction counts must be positive")
        if (self.examples_per_instruction is None) == (self.total_examples is None):
            raise ValueError("set exactly one of examples_per_instruction / total_examples")
        if self.examples_per_instruction is not None and self.examples_per_instruction < 1:
            raise ValueError("examples_per_instruction must be positive")
        if self.total_examples is not None and self.total_examples < self.num_instructions:
            raise ValueError("total_examples must cover every instruction at least once")
        if self.pattern_length < 1 or self.pattern_length > self.input_length:
            raise ValueError("pattern length must be in [1, input_length]")
        if not self.occurrence_set or any(occ < 1 for occ in self.occurrence_set):
            raise ValueError("occurrence_set must be non-empty positive integers")
        if max(self.occurrence_set) * self.pattern_length > self.input_length:
            raise ValueError("max occurrences * pattern length exceeds input length")
        if not 0.0 <= self.noop_fraction <= 1.0:
            raise ValueError("noop_fraction must lie in [0, 1]")
        if self.test_examples < self.holdout_instructions:
            raise ValueError("test_examples must cover every held-out instruction")
        self.semantic_class.check_length(self.pattern_length)

    @property
    def train_total(self) -> int:
        if self.total_examples is not None:
            return self.total_examples
        return self.examples_per_instruction * self.num_instructions

    @property
    def effective_replacement_length(self) -> int:
        return self.replacement_length if self.replacement_length is not None else self.pattern_length


@dataclass(frozen=True)
class CrossClassConfig:
    """Paired train/test generation across semantic classes: train patterns
    cycle through train_classes, test patterns come from test_class."""

    name: str
    config: DatasetConfig
    train_classes: tuple[SemanticClass, ...]
    test_class: SemanticClass

    def __post_init__(self) -> None:
        if not self.train_classes:
            raise ValueError("at least one train class required")
        for sclass in (*self.train_classes, self.test_class):
            sclass.check_length(self.config.pattern_length)


@dataclass
class DatasetManifest:
    config: dict
    train_instructions: list[Instruction]
    test_instructions: list[Instruction]
    per_instruction_counts: dict[str, int]
    files: dict[str, str] = field(default_factory=dict)
    checksum: str = ""

    def __post_init__(self) -> None:
        train = {instr.pattern for instr in self.train_instructions}
        test = {instr.pattern for instr in self.test_instructions}
        if train & test:
            raise ValueError("train and test instruction patterns overlap")

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "train_instructions": [
                {"pattern": i.pattern, "replacement": i.replacement}
                for i in self.train_instructions
            ],
            "test_instructions": [
                {"pattern": i.pattern, "replacement": i.replacement}
                for i in self.test_instructions
            ],
            "per_instruction_counts": self.per_instruction_counts,
            "files": self.files,
            "checksum": self.checksum,
        }

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8")


def gen_pattern(sclass: SemanticClass, length: int, rng: random.Random, symbols: str = LOWERCASE) -> str:
    """Sample one pattern of the given structural class and length."""
    if length < 1:
        raise ValueError("pattern length must be positive")
    if sclass.kind == "unconstrained":
        return "".join(rng.choices(symbols, k=length))
    sclass.check_length(length)
    if sclass.kind == "repeated":
        blocks = rng.choices(symbols, k=length // sclass.k)
        return "".join(ch * sclass.k for ch in blocks)
    unit = "".join(rng.choices(symbols, k=length // sclass.k))
    if sclass.kind == "periodic":
        return unit * sclass.k
    # mirror: unit, reversed unit, unit, ...
    flipped = unit[::-1]
    return "".join(unit if i % 2 == 0 else flipped for i in range(sclass.k))


def embed_pattern(
    pattern: str,
    input_length: int,
    occurrences: int,
    rng: random.Random,
    symbols: str = LOWERCASE,
    max_attempts: int = _EMBED_ATTEMPTS,
) -> str:
    """Build a string of input_length containing pattern exactly `occurrences`
    times under overlap-aware counting.

    Placement slots are drawn uniformly over non-overlapping layouts; random
    gap fill can create or merge occurrences, so the exact count is verified
    and the attempt resampled on collision. Patterns that spawn extra
    occurrences when butted together (abab + abab) keep one gap symbol
    between slots, otherwise dense layouts would almost never verify.
    """
    m = len(pattern)
    if occurrences < 0:
        raise ValueError("occurrences must be non-negative")
    if occurrences * m > input_length:
        raise ValueError("occurrences do not fit in the input length")
    gap = 0
    if occurrences > 1 and count_occurrences(pattern + pattern, pattern) > 2:
        gap = 1
        if occurrences * m + (occurrences - 1) > input_length:
            raise GenerationError(
                f"pattern {pattern!r} forms extra occurrences when adjacent; "
                f"{occurrences} separated placements do not fit in length {input_length}"
            )
    stride = m + gap - 1
    window = input_length - occurrences * m - (occurrences - 1) * gap + occurrences
    for _ in range(max_attempts):
        if occurrences == 0:
            candidate = "".join(rng.choices(symbols, k=input_length))
        else:
            # q -> q + i*stride bijects sorted draws onto valid slot layouts.
            starts = [q + i * stride for i, q in enumerate(sorted(rng.sample(range(window), occurrences)))]
            chars = rng.choices(symbols, k=input_length)
            for start in starts:
                chars[start:start + m] = pattern
            candidate = "".join(chars)
        if count_occurrences(candidate, pattern) == occurrences:
            return candidate
    raise GenerationError(
        f"could not embed pattern {pattern!r} exactly {occurrences} time(s) "
        f"in length {input_length} after {max_attempts} attempts"
    )


def make_example(
    instr: Instruction,
    input_length: int,
    occurrences: int,
    rng: random.Random,
    symbols: str = LOWERCASE,
) -> Example:
    """One record: embedded input plus leftmost-replacement target (or copy)."""
    text = embed_pattern(instr.pattern, input_length, occurrences, rng, symbols)
    if occurrences == 0:
        return Example(instr, text, text, is_noop=True, occurrences=0)
    applied = apply_rule_once(Rule(instr.pattern, instr.replacement), text)
    assert applied is not None
    return Example(instr, text, applied[0], is_noop=False, occurrences=occurrences)


def allocate_counts(total: int, num_instructions: int, spec: Optional[PowerLawSpec] = None) -> list[int]:
    """Split `total` examples over ranked instructions.

    Uniform split when spec is None (counts differ by at most 1). With a
    power law, quotas follow the rank weights and are rounded by
    largest-remainder apportionment; every rank keeps at least one example.
    """
    if num_instructions < 1:
        raise ValueError("need at least one instruction")
    if total < num_instructions:
        raise GenerationError("cannot give every instruction an example")
    if spec is None:
        base, rem = divmod(total, num_instructions)
        return [base + 1 if i < rem else base for i in range(num_instructions)]
    weights = spec.weights(num_instructions)
    scale = total / sum(weights)
    quotas = [w * scale for w in weights]
    counts = [math.floor(q) for q in quotas]
    leftovers = sorted(range(num_instructions), key=lambda i: (counts[i] - quotas[i], i))
    for i in leftovers[: total - sum(counts)]:
        counts[i] += 1
    # Lift empty tail ranks to 1, taking from the tail end of the maximal plateau
    # so counts stay non-increasing in rank.
    while 0 in counts:
        zero_at = counts.index(0)
        peak = max(counts)
        donor = len(counts) - 1 - counts[::-1].index(peak)
        counts[donor] -= 1
        counts[zero_at] += 1
    return counts


def noop_count(fraction: float, total: int) -> int:
    """floor(fraction * total), rounded up when the fractional part is >= 1/2."""
    exact = fraction * total
    base = math.floor(exact)
    return base + 1 if exact - base >= 0.5 else base


def example_record(ex: Example) -> dict:
    return {
        "pattern": ex.instruction.pattern,
        "replacement": ex.instruction.replacement,
        "input": ex.input,
        "target": ex.target,
        "is_noop": ex.is_noop,
        "occurrences": ex.occurrences,
    }


def parse_example(record: dict) -> Example:
    return Example(
        Instruction(record["pattern"], record["replacement"]),
        record["input"],
        record["target"],
        record["is_noop"],
        record["occurrences"],
    )


def _sample_distinct_patterns(
    classes: Sequence[SemanticClass],
    count: int,
    pattern_length: int,
    rng: random.Random,
    taken: Optional[set[str]] = None,
) -> list[str]:
    """Distinct patterns, instruction i drawn from classes[i % len(classes)]."""
    needed_per_class: dict[SemanticClass, int] = {}
    for i in range(count):
        sclass = classes[i % len(classes)]
        needed_per_class[sclass] = needed_per_class.get(sclass, 0) + 1
    for sclass, needed in needed_per_class.items():
        space = sclass.space_size(pattern_length)
        if space < needed:
            raise GenerationError(
                f"alphabet too small: {needed} distinct {sclass.kind} patterns "
                f"requested from a space of {space}"
            )
    seen: set[str] = set(taken or ())
    out: list[str] = []
    budget = _DISTINCT_ATTEMPT_FACTOR * count + 10_000
    while len(out) < count:
        sclass = classes[len(out) % len(classes)]
        for _ in range(budget):
            candidate = gen_pattern(sclass, pattern_length, rng)
            if candidate not in seen:
                break
        else:
            raise GenerationError("exhausted attempts sampling distinct patterns")
        seen.add(candidate)
        out.append(candidate)
    return out


def _sample_instructions(
    config: DatasetConfig,
    train_classes: Sequence[SemanticClass],
    test_class: SemanticClass,
) -> tuple[list[Instruction], list[Instruction]]:
    rng = substream(config.seed, "instructions")
    train_patterns = _sample_distinct_patterns(
        train_classes, config.num_instructions, config.pattern_length, rng
    )
    test_patterns = _sample_distinct_patterns(
        [test_class], config.holdout_instructions, config.pattern_length, rng,
        taken=set(train_patterns),
    )

    def replacement_for(sclass: SemanticClass) -> str:
        if config.constrain_replacement:
            return gen_pattern(sclass, config.effective_replacement_length, rng)
        return "".join(rng.choices(LOWERCASE, k=config.effective_replacement_length))

    train = [
        Instruction(pattern, replacement_for(train_classes[i % len(train_classes)]))
        for i, pattern in enumerate(train_patterns)
    ]
    test = [Instruction(pattern, replacement_for(test_class)) for pattern in test_patterns]
    return train, test


def _render_block(task: tuple) -> bytes:
    """Serialize one instruction's example block; fully determined by its substream."""
    seed, split, index, pattern, replacement, count, input_length, occurrence_set, noop_fraction = task
    rng = substream(seed, split, index)
    instr = Instruction(pattern, replacement)
    noops = noop_count(noop_fraction, count)
    flags = [True] * noops + [False] * (count - noops)
    rng.shuffle(flags)
    lines = []
    for is_noop in flags:
        occ = 0 if is_noop else occurrence_set[rng.randrange(len(occurrence_set))]
        ex = make_example(instr, input_length, occ, rng)
        lines.append(json.dumps(example_record(ex), separators=(",", ":")))
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def _write_blocks(path: Path, tasks: list[tuple], jobs: int) -> str:
    """Write blocks in task order (any worker count gives identical bytes)."""
    digest = hashlib.sha256()
    with open(path, "wb") as handle:
        if jobs <= 1:
            for task in tasks:
                blob = _render_block(task)
                handle.write(blob)
                digest.update(blob)
        else:
            with Pool(processes=jobs) as pool:
                chunksize = max(1, len(tasks) // (jobs * 8))
                for blob in pool.imap(_render_block, tasks, chunksize=chunksize):
                    handle.write(blob)
                    digest.update(blob)
    return digest.hexdigest()


def _combined_checksum(files: dict[str, str]) -> str:
    listing = "\n".join(f"{name}:{digest}" for name, digest in sorted(files.items()))
    return hashlib.sha256(listing.encode("utf-8")).hexdigest()


def _emit_dataset(
    config: DatasetConfig,
    config_echo: dict,
    train_instructions: list[Instruction],
    test_instructions: list[Instruction],
    out_dir: Path,
    jobs: int,
) -> DatasetManifest:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_counts = allocate_counts(config.train_total, config.num_instructions, config.power_law)
    test_counts = allocate_counts(config.test_examples, config.holdout_instructions)

    def tasks_for(split: str, instructions: list[Instruction], counts: list[int]) -> list[tuple]:
        return [
            (
                config.seed, split, i, instr.pattern, instr.replacement, counts[i],
                config.input_length, tuple(config.occurrence_set), config.noop_fraction,
            )
            for i, instr in enumerate(instructions)
        ]

    temp_paths = []
    try:
        files: dict[str, str] = {}
        for name, split, instructions, counts in (
            (TRAIN_FILE, "train", train_instructions, train_counts),
            (TEST_FILE, "test", test_instructions, test_counts),
        ):
            temp = out_dir / (name + ".tmp")
            temp_paths.append(temp)
            files[name] = _write_blocks(temp, tasks_for(split, instructions, counts), jobs)
        for name in files:
            (out_dir / (name + ".tmp")).replace(out_dir / name)
        temp_paths.clear()
    finally:
        for temp in temp_paths:
            temp.unlink(missing_ok=True)

    manifest = DatasetManifest(
        config=config_echo,
        train_instructions=train_instructions,
        test_instructions=test_instructions,
        per_instruction_counts={
            instr.pattern: count for instr, count in zip(train_instructions, train_counts)
        },
        files=files,
        checksum=_combined_checksum(files),
    )
    manifest.write(out_dir / MANIFEST_FILE)
    return manifest


def config_echo_dict(config: DatasetConfig) -> dict:
    echo = {
        "seed": config.seed,
        "num_instructions": config.num_instructions,
        "examples_per_instruction": config.examples_per_instruction,
        "total_examples": config.total_examples,
        "input_length": config.input_length,
        "pattern_length": config.pattern_length,
        "replacement_length": config.effective_replacement_length,
        "noop_fraction": config.noop_fraction,
        "occurrence_set": list(config.occurrence_set),
        "semantic_class": {"kind": config.semantic_class.kind, "k": config.semantic_class.k},
        "constrain_replacement": config.constrain_replacement,
        "power_law": {"shape": config.power_law.shape} if config.power_law else None,
        "holdout_instructions": config.holdout_instructions,
        "test_examples": config.test_examples,
    }
    return echo


def make_dataset(config: DatasetConfig, out_dir: Path, jobs: int = 1) -> DatasetManifest:
    """Emit train.jsonl / test.jsonl / manifest.json for one configuration."""
    train, test = _sample_instructions(
        config, [config.semantic_class], config.semantic_class
    )
    return _emit_dataset(config, config_echo_dict(config), train, test, Path(out_dir), jobs)


def cross_class_splits(
    configs: Iterable[CrossClassConfig],
    out_root: Path,
    jobs: int = 1,
) -> list[DatasetManifest]:
    """Emit one paired dataset per cross-class configuration under out_root/<name>."""
    manifests = []
    for cc in configs:
        train, test = _sample_instructions(cc.config, list(cc.train_classes), cc.test_class)
        echo = config_echo_dict(cc.config)
        echo["train_classes"] = [{"kind": s.kind, "k": s.k} for s in cc.train_classes]
        echo["test_class"] = {"kind": cc.test_class.kind, "k": cc.test_class.k}
        echo["name"] = cc.name
        manifests.append(
            _emit_dataset(cc.config, echo, train, test, Path(out_root) / cc.name, jobs)
        )
    return manifests
