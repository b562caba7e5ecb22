"""Multi-hop encrypted-rewriting task generator.

Each example carries a sentence and an instruction (find_word, replace_word,
key); the target replaces the first token occurrence of find_word with the
Caesar-encrypted replacement, or copies the sentence when the word is absent
(no-op). Train and test draw their words from disjoint dictionaries.

Sentences come from an ingested corpus file when one is supplied; otherwise a
deterministic template generator keeps the pipeline hermetic.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from rewritebench.taskgen import noop_count, substream

LOWER = "abcdefghijklmnopqrstuvwxyz"
_LOWER_SET = frozenset(LOWER)
_SHIFT_TABLES = [str.maketrans(LOWER, LOWER[k:] + LOWER[:k]) for k in range(26)]

TRAIN_FILE = "train.jsonl"
TEST_FILE = "test.jsonl"
MANIFEST_FILE = "manifest.json"

_TEMPLATES = (
    "the {adj} {word} {verb} {tail}",
    "a {adj} {word} {verb} {tail}",
    "every {adj} {word} {verb} {tail}",
    "that {word} {verb} {tail}",
    "some {adj} {word} slowly {verb} {tail}",
)
_ADJECTIVES = (
    "old", "small", "quiet", "heavy", "golden", "broken", "distant",
    "narrow", "gentle", "crimson", "hollow", "rusty", "silent", "weary",
    "pale", "sturdy", "faded", "smooth", "crooked", "plain",
)
_VERBS = (
    "rests", "waits", "stands", "drifts", "gleams", "appears", "vanishes",
    "lingers", "settles", "turns", "shines", "trembles", "leans", "fades",
    "rises", "sits", "hangs", "sways", "remains", "glows",
)
_TAILS = (
    "near the harbor", "beside the market", "under the bridge",
    "behind the temple", "along the river", "inside the workshop",
    "beyond the meadow", "outside the old station", "within the courtyard",
    "past the orchard", "near the lighthouse", "under the archway",
    "by the gray wall", "at the far corner", "before the main door",
)


class CipherGenerationError(ValueError):
    """Raised when the cipher dataset configuration cannot be satisfied."""


def caesar(word: str, key: int) -> str:
    """Shift every letter forward by key modulo 26 (key 26 acts like key 0)."""
    if not set(word) <= _LOWER_SET:
        raise ValueError(f"word {word!r} must be lowercase a-z")
    return word.translate(_SHIFT_TABLES[key % 26])


@dataclass(frozen=True)
class CipherInstruction:
    find_word: str
    replace_word: str
    key: int

    def __post_init__(self) -> None:
        for word in (self.find_word, self.replace_word):
            if not word or not set(word) <= _LOWER_SET:
                raise ValueError(f"word {word!r} must be lowercase a-z")
        if not 0 <= self.key <= 25:
            raise ValueError("key must lie in [0, 25]")


@dataclass(frozen=True)
class CipherExample:
    sentence: tuple[str, ...]
    instruction: CipherInstruction
    target: tuple[str, ...]
    is_noop: bool


@dataclass(frozen=True)
class Dictionary:
    name: str
    words: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError(f"dictionary {self.name!r} is empty")
        if len(set(self.words)) != len(self.words):
            raise ValueError(f"dictionary {self.name!r} has duplicate words")
        for word in self.words:
            if not word or not set(word) <= _LOWER_SET:
                raise ValueError(f"dictionary word {word!r} must be lowercase a-z")

    @classmethod
    def load(cls, path: Path, name: Optional[str] = None) -> "Dictionary":
        words = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            word = line.strip()
            if word and not word.startswith("#"):
                words.append(word)
        return cls(name or Path(path).stem, tuple(words))


def tokenize(sentence: str) -> tuple[str, ...]:
    """Lowercase and split on anything that is not a letter."""
    out: list[str] = []
    word: list[str] = []
    for ch in sentence.lower():
        if ch in _LOWER_SET:
            word.append(ch)
        elif word:
            out.append("".join(word))
            word = []
    if word:
        out.append("".join(word))
    return tuple(out)


def apply_instruction(tokens: Sequence[str], instr: CipherInstruction) -> CipherExample:
    """Replace the first token occurrence of find_word with the encrypted
    replacement; copy the sentence when the word does not occur."""
    tokens = tuple(tokens)
    if instr.find_word not in tokens:
        return CipherExample(tokens, instr, tokens, is_noop=True)
    at = tokens.index(instr.find_word)
    encrypted = caesar(instr.replace_word, instr.key)
    target = tokens[:at] + (encrypted,) + tokens[at + 1:]
    return CipherExample(tokens, instr, target, is_noop=False)


@dataclass(frozen=True)
class SentencePool:
    """Tokenized corpus sentences with their contained dictionary words."""

    entries: tuple[tuple[tuple[str, ...], frozenset[str]], ...]

    def containing(self, word: str) -> list[int]:
        return [i for i, (_, contained) in enumerate(self.entries) if word in contained]


def ingest_corpus(path: Path, dictionary: Dictionary) -> SentencePool:
    """One sentence per line; sentences with no dictionary word are kept and
    remain eligible for no-op construction."""
    vocabulary = set(dictionary.words)
    entries = []
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        tokens = tokenize(line)
        if tokens:
            entries.append((tokens, frozenset(set(tokens) & vocabulary)))
    if not entries:
        raise CipherGenerationError(f"corpus {path} contains no sentences")
    return SentencePool(tuple(entries))


def template_sentence(word: str, rng: random.Random, max_attempts: int = 50) -> tuple[str, ...]:
    """Deterministic fallback sentence containing `word` exactly once."""
    for _ in range(max_attempts):
        template = rng.choice(_TEMPLATES)
        sentence = template.format(
            adj=rng.choice(_ADJECTIVES),
            word=word,
            verb=rng.choice(_VERBS),
            tail=rng.choice(_TAILS),
        )
        tokens = tokenize(sentence)
        if tokens.count(word) == 1:
            return tokens
    raise CipherGenerationError(f"could not build a template sentence for {word!r}")


def _sentence_with(word: str, pool: Optional[SentencePool], rng: random.Random) -> tuple[str, ...]:
    if pool is not None:
        indices = pool.containing(word)
        if indices:
            return pool.entries[rng.choice(indices)][0]
    return template_sentence(word, rng)


def _sentence_without(
    word: str,
    other_words: Sequence[str],
    pool: Optional[SentencePool],
    rng: random.Random,
    max_attempts: int = 50,
) -> tuple[str, ...]:
    for _ in range(max_attempts):
        if pool is not None:
            tokens = pool.entries[rng.randrange(len(pool.entries))][0]
        else:
            tokens = template_sentence(rng.choice(other_words), rng)
        if word not in tokens:
            return tokens
    raise CipherGenerationError(f"could not find a sentence avoiding {word!r}")


def _cipher_record(ex: CipherExample) -> dict:
    return {
        "sentence": " ".join(ex.sentence),
        "find": ex.instruction.find_word,
        "replace": ex.instruction.replace_word,
        "key": ex.instruction.key,
        "target": " ".join(ex.target),
        "is_noop": ex.is_noop,
    }


def _emit_split(
    path: Path,
    seed: int,
    split: str,
    size: int,
    noop_fraction: float,
    words: tuple[str, ...],
    pool: Optional[SentencePool],
    distinct_finds: bool,
) -> str:
    """Write one JSONL split; per-example substreams keep output order-free."""
    noops = noop_count(noop_fraction, size)
    flags = [True] * noops + [False] * (size - noops)
    substream(seed, split, "flags").shuffle(flags)
    if distinct_finds:
        order = list(words)
        substream(seed, split, "words").shuffle(order)
        finds = [order[i % len(order)] for i in range(size)]
    else:
        finds = None

    digest = hashlib.sha256()
    with open(path, "wb") as handle:
        for i, is_noop in enumerate(flags):
            rng = substream(seed, split, "ex", i)
            find_word = finds[i] if finds is not None else words[rng.randrange(len(words))]
            others = [w for w in words if w != find_word]
            if is_noop:
                tokens = _sentence_without(find_word, others or list(words), pool, rng)
            else:
                tokens = _sentence_with(find_word, pool, rng)
            replace_word = others[rng.randrange(len(others))] if others else find_word
            key = rng.randint(1, 25)
            ex = apply_instruction(tokens, CipherInstruction(find_word, replace_word, key))
            if ex.is_noop != is_noop:
                # Corpus sentence drawn for a has-op must contain the word.
                raise CipherGenerationError(
                    f"{split} example {i}: sentence does not match the planned no-op flag"
                )
            blob = (json.dumps(_cipher_record(ex), separators=(",", ":")) + "\n").encode("utf-8")
            handle.write(blob)
            digest.update(blob)
    return digest.hexdigest()


def make_cipher_dataset(
    train_dict: Dictionary,
    test_dict: Dictionary,
    out_dir: Path,
    train_size: int = 40_000,
    test_size: int = 5_000,
    noop_fraction: float = 0.4,
    seed: int = 0,
    corpus_path: Optional[Path] = None,
) -> dict:
    """Emit train/test JSONL plus a manifest; dictionaries must be disjoint."""
    overlap = set(train_dict.words) & set(test_dict.words)
    if overlap:
        raise CipherGenerationError(f"dictionaries overlap: {sorted(overlap)[:5]}")
    if not 0.0 <= noop_fraction <= 1.0:
        raise ValueError("noop_fraction must lie in [0, 1]")
    if train_size < 1 or test_size < 1:
        raise ValueError("split sizes must be positive")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_pool = ingest_corpus(corpus_path, train_dict) if corpus_path else None
    test_pool = ingest_corpus(corpus_path, test_dict) if corpus_path else None

    temp_paths = []
    try:
        files = {}
        for name, split, size, words, pool, distinct in (
            (TRAIN_FILE, "train", train_size, train_dict.words, train_pool, False),
            (TEST_FILE, "test", test_size, test_dict.words, test_pool, True),
        ):
            temp = out_dir / (name + ".tmp")
            temp_paths.append(temp)
            files[name] = _emit_split(temp, seed, split, size, noop_fraction, words, pool, distinct)
        for name in files:
            (out_dir / (name + ".tmp")).replace(out_dir / name)
        temp_paths.clear()
    finally:
        for temp in temp_paths:
            temp.unlink(missing_ok=True)

    listing = "\n".join(f"{name}:{digest}" for name, digest in sorted(files.items()))
    manifest = {
        "config": {
            "seed": seed,
            "train_size": train_size,
            "test_size": test_size,
            "noop_fraction": noop_fraction,
            "train_dictionary": train_dict.name,
            "test_dictionary": test_dict.name,
            "corpus": str(corpus_path) if corpus_path else None,
        },
        "train_words": len(train_dict.words),
        "test_words": len(test_dict.words),
        "files": files,
        "checksum": hashlib.sha256(listing.encode("utf-8")).hexdigest(),
    }
    (out_dir / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest
