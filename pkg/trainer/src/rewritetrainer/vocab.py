"""Fixed character vocabulary and example framing.

An example is serialized as

    <PAT> pattern <REP> replacement <IN> input <OUT> target <EOS>

so the token length is the four field lengths plus five marker tokens.
Training loss is applied only to positions after <OUT>; everything up to and
including <OUT> is the prompt.
"""

from __future__ import annotations

LETTERS = "abcdefghijklmnopqrstuvwxyz"

PAD, PAT, REP, IN, OUT, EOS = range(6)
SPECIAL_NAMES = {PAD: "<PAD>", PAT: "<PAT>", REP: "<REP>", IN: "<IN>", OUT: "<OUT>", EOS: "<EOS>"}
_CHAR_BASE = len(SPECIAL_NAMES)

VOCAB_SIZE = _CHAR_BASE + len(LETTERS)

_CHAR_TO_ID = {ch: _CHAR_BASE + i for i, ch in enumerate(LETTERS)}
_ID_TO_CHAR = {i: ch for ch, i in _CHAR_TO_ID.items()}


class VocabularyError(ValueError):
    """A symbol falls outside the fixed character vocabulary."""


def encode_text(text: str) -> list[int]:
    try:
        return [_CHAR_TO_ID[ch] for ch in text]
    except KeyError as exc:
        raise VocabularyError(f"symbol {exc.args[0]!r} outside vocabulary") from exc


def decode_text(ids: list[int]) -> str:
    return "".join(_ID_TO_CHAR.get(i, "?") for i in ids)


def encode_example(record: dict) -> list[int]:
    """Token ids for one dataset record (pattern/replacement/input/target)."""
    return (
        [PAT] + encode_text(record["pattern"])
        + [REP] + encode_text(record["replacement"])
        + [IN] + encode_text(record["input"])
        + [OUT] + encode_text(record["target"])
        + [EOS]
    )


def encode_prompt(record: dict) -> list[int]:
    """Prompt part only, ending at <OUT>; the model completes the target."""
    return (
        [PAT] + encode_text(record["pattern"])
        + [REP] + encode_text(record["replacement"])
        + [IN] + encode_text(record["input"])
        + [OUT]
    )


def decode_example(ids: list[int]) -> dict:
    """Invert encode_example; raises on malformed framing."""
    fields = {}
    markers = [(PAT, "pattern"), (REP, "replacement"), (IN, "input"), (OUT, "target")]
    position = 0
    for marker_index, (marker, name) in enumerate(markers):
        if position >= len(ids) or ids[position] != marker:
            raise VocabularyError(f"expected {SPECIAL_NAMES[marker]} at position {position}")
        position += 1
        stop_set = {markers[marker_index + 1][0]} if marker_index + 1 < len(markers) else {EOS}
        start = position
        while position < len(ids) and ids[position] not in stop_set:
            position += 1
        fields[name] = decode_text(ids[start:position])
    if position >= len(ids) or ids[position] != EOS:
        raise VocabularyError("missing <EOS>")
    return fields
