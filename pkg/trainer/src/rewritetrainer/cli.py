"""Standalone trainer entry point: train on generated JSONL, emit predictions."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from rewritetrainer.config import load_train_config
from rewritetrainer.predict import predict_file
from rewritetrainer.training import load_checkpoint, train


def cmd_train(args: argparse.Namespace) -> int:
    config = load_train_config(Path(args.config))
    checkpoint = train(config)
    print(f"checkpoint: {checkpoint}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_checkpoint(Path(args.checkpoint), device=args.device)
    out = predict_file(
        model, Path(args.reference), Path(args.out),
        batch_size=args.batch_size, device=args.device,
    )
    print(f"predictions: {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rewritetrainer")
    sub = parser.add_subparsers(dest="command", required=True)

    trainp = sub.add_parser("train", help="train from a TOML config")
    trainp.add_argument("--config", required=True)
    trainp.set_defaults(func=cmd_train)

    predictp = sub.add_parser("predict", help="greedy-decode a reference file")
    predictp.add_argument("--checkpoint", required=True)
    predictp.add_argument("--reference", required=True)
    predictp.add_argument("--out", required=True)
    predictp.add_argument("--batch-size", type=int, default=256)
    predictp.add_argument("--device", default="cpu")
    predictp.set_defaults(func=cmd_predict)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
