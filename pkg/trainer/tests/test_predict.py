import json
import shutil
import subprocess

import pytest
import torch

from rewritetrainer.model import CharTransformer
from rewritetrainer.predict import predict_file, predict_records
from conftest import make_records


@pytest.fixture()
def untrained_model():
    torch.manual_seed(0)
    return CharTransformer(layers=1, heads=2, hidden=32, max_len=64)


def test_prediction_file_schema(untrained_model, tiny_train_file, tmp_path):
    path, records = tiny_train_file
    out = tmp_path / "preds.jsonl"
    predict_file(untrained_model, path, out)
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert [row["example_id"] for row in rows] == list(range(len(records)))
    assert all(isinstance(row["prediction"], str) for row in rows)


def test_prediction_order_matches_records(untrained_model):
    records = make_records(12, seed=8)
    first = predict_records(untrained_model, records)
    second = predict_records(untrained_model, records, batch_size=3)
    assert first == second  # batching must not reorder or change outputs


def test_variable_prompt_lengths_supported(untrained_model):
    records = make_records(6, seed=9, pattern_len=2, input_len=8)
    records += make_records(6, seed=10, pattern_len=3, input_len=12)
    predictions = predict_records(untrained_model, records)
    assert len(predictions) == 12


@pytest.mark.skipif(shutil.which("rewritebench") is None, reason="generator CLI not installed")
def test_scorer_accepts_prediction_file(untrained_model, tiny_train_file, tmp_path):
    """End-to-end through the published eval interface."""
    path, _ = tiny_train_file
    preds = tmp_path / "preds.jsonl"
    predict_file(untrained_model, path, preds)
    report_path = tmp_path / "report.json"
    result = subprocess.run(
        ["rewritebench", "eval", str(path), str(preds), "--out", str(report_path)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    payload = json.loads(report_path.read_text())
    assert 0.0 <= payload["total"]["accuracy"] <= 1.0
    assert payload["total"]["count"] == 64
