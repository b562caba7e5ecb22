"""Exact-match scoring of prediction files against reference datasets.

Predictions join the reference by example_id (the 0-based line index of the
reference file), so record order in the prediction file is irrelevant.
Correctness is byte-exact string equality; reports break accuracy down by
no-op / has-op, by instruction, and by occurrence count, and track how often
the model simply copied its input on has-op examples.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence


class ScoringError(ValueError):
    """Raised on malformed or mismatched reference/prediction files."""


@dataclass(frozen=True)
class ReferenceRecord:
    input_text: str
    target: str
    is_noop: bool
    instruction_key: str
    occurrences: Optional[int] = None


@dataclass
class SplitScore:
    count: int = 0
    correct: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.count if self.count else 0.0

    def to_json_dict(self) -> dict:
        return {"count": self.count, "correct": self.correct, "accuracy": self.accuracy}


@dataclass
class EvalReport:
    total: SplitScore
    hasop: SplitScore
    noop: SplitScore
    per_instruction: dict[str, SplitScore]
    per_occurrence: dict[int, SplitScore]
    copied_hasops: int
    meta: dict = field(default_factory=dict)

    @property
    def total_accuracy(self) -> float:
        return self.total.accuracy

    @property
    def hasop_accuracy(self) -> float:
        return self.hasop.accuracy

    @property
    def noop_accuracy(self) -> float:
        return self.noop.accuracy

    @property
    def always_noop_rate(self) -> float:
        """Share of has-op examples whose prediction equals the input."""
        return self.copied_hasops / self.hasop.count if self.hasop.count else 0.0

    def to_json_dict(self) -> dict:
        return {
            "meta": self.meta,
            "total": self.total.to_json_dict(),
            "hasop": self.hasop.to_json_dict(),
            "noop": self.noop.to_json_dict(),
            "always_noop_rate": self.always_noop_rate,
            "per_instruction": {
                key: split.to_json_dict() for key, split in sorted(self.per_instruction.items())
            },
            "per_occurrence": {
                str(occ): split.to_json_dict() for occ, split in sorted(self.per_occurrence.items())
            },
        }

    def render_text(self) -> str:
        lines = [
            f"total    {self.total.correct}/{self.total.count}  accuracy {self.total_accuracy:.4f}",
            f"has-op   {self.hasop.correct}/{self.hasop.count}  accuracy {self.hasop_accuracy:.4f}",
            f"no-op    {self.noop.correct}/{self.noop.count}  accuracy {self.noop_accuracy:.4f}",
            f"always-noop rate on has-ops: {self.always_noop_rate:.4f}",
        ]
        if self.per_occurrence:
            lines.append("per-occurrence accuracy:")
            for occ, split in sorted(self.per_occurrence.items()):
                lines.append(f"  {occ:>3}  {split.correct}/{split.count}  {split.accuracy:.4f}")
        return "\n".join(lines)

    def write(self, path: Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8")


def _normalize(record: dict, line_no: int, path: Path) -> ReferenceRecord:
    if "pattern" in record:
        return ReferenceRecord(
            input_text=record["input"],
            target=record["target"],
            is_noop=record["is_noop"],
            instruction_key=f"{record['pattern']}->{record['replacement']}",
            occurrences=record.get("occurrences"),
        )
    if "find" in record:
        return ReferenceRecord(
            input_text=record["sentence"],
            target=record["target"],
            is_noop=record["is_noop"],
            instruction_key=f"{record['find']}->{record['replace']}#{record['key']}",
        )
    raise ScoringError(f"{path}:{line_no}: unrecognized reference schema")


def read_reference(path: Path) -> list[ReferenceRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if line.strip():
                records.append(_normalize(json.loads(line), line_no, Path(path)))
    if not records:
        raise ScoringError(f"{path}: reference file is empty")
    return records


def read_predictions(path: Path) -> dict[int, str]:
    predictions: dict[int, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            try:
                example_id = record["example_id"]
                prediction = record["prediction"]
            except KeyError as exc:
                raise ScoringError(f"{path}:{line_no}: missing field {exc}") from exc
            if example_id in predictions:
                raise ScoringError(f"{path}:{line_no}: duplicate example_id {example_id}")
            predictions[example_id] = prediction
    return predictions


def score_records(
    reference: Sequence[ReferenceRecord],
    predictions: dict[int, str],
    meta: Optional[dict] = None,
) -> EvalReport:
    missing = [i for i in range(len(reference)) if i not in predictions]
    if missing:
        raise ScoringError(f"predictions missing for example_id(s) {missing[:5]} "
                           f"({len(missing)} of {len(reference)})")
    if len(predictions) != len(reference):
        extras = sorted(set(predictions) - set(range(len(reference))))
        raise ScoringError(f"predictions cover {len(predictions)} ids for {len(reference)} "
                           f"reference examples (extraneous: {extras[:5]})")

    report = EvalReport(
        total=SplitScore(), hasop=SplitScore(), noop=SplitScore(),
        per_instruction={}, per_occurrence={}, copied_hasops=0, meta=dict(meta or {}),
    )
    for i, ref in enumerate(reference):
        prediction = predictions[i]
        correct = prediction == ref.target
        split = report.noop if ref.is_noop else report.hasop
        for bucket in (report.total, split):
            bucket.count += 1
            bucket.correct += int(correct)
        instr = report.per_instruction.setdefault(ref.instruction_key, SplitScore())
        instr.count += 1
        instr.correct += int(correct)
        if ref.occurrences is not None:
            occ = report.per_occurrence.setdefault(ref.occurrences, SplitScore())
            occ.count += 1
            occ.correct += int(correct)
        if not ref.is_noop and prediction == ref.input_text:
            report.copied_hasops += 1
    return report


def score(reference_path: Path, predictions_path: Path, meta: Optional[dict] = None) -> EvalReport:
    """Score a prediction file against a reference dataset file."""
    return score_records(read_reference(reference_path), read_predictions(predictions_path), meta)


def copy_baseline(reference: Sequence[ReferenceRecord]) -> dict[int, str]:
    """Trivial predictor that echoes its input; the no-op-collapse reference point."""
    return {i: ref.input_text for i, ref in enumerate(reference)}


def curve(points: Sequence[tuple[float, EvalReport]], key_name: str = "num_instructions") -> str:
    """CSV of (key, total, hasop, noop) rows sorted by key."""
    if len(points) < 2:
        raise ScoringError("a curve needs at least two points")
    keys = [key for key, _ in points]
    if len(set(keys)) != len(keys):
        raise ScoringError(f"duplicate {key_name} values in curve points")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([key_name, "total", "hasop", "noop"])
    for key, report in sorted(points, key=lambda pair: pair[0]):
        writer.writerow([
            _format_key(key),
            f"{report.total_accuracy:.6f}",
            f"{report.hasop_accuracy:.6f}",
            f"{report.noop_accuracy:.6f}",
        ])
    return buffer.getvalue()


def _format_key(key: float) -> str:
    return str(int(key)) if float(key).is_integer() else f"{key:g}"
