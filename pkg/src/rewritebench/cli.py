"""Command-line entry point: dataset generation, program runs, cipher tasks,
scoring, and curve assembly.

Configs are strict flat TOML: unknown keys are rejected and `seed` is
mandatory, so each emitted artifact is reproducible from its config alone.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from types import SimpleNamespace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from rewritebench import bundled_path
from rewritebench.cipher import CipherGenerationError, Dictionary, make_cipher_dataset
from rewritebench.engine import DEFAULT_STEP_LIMIT, parse_program_file, run
from rewritebench.scoring import (
    ScoringError,
    copy_baseline,
    curve,
    read_predictions,
    read_reference,
    score_records,
)
from rewritebench.taskgen import (
    CrossClassConfig,
    DatasetConfig,
    GenerationError,
    PowerLawSpec,
    SemanticClass,
    cross_class_splits,
    make_dataset,
)

_REWRITE_KEYS = {
    "kind", "seed", "num_instructions", "examples_per_instruction", "total_examples",
    "input_length", "pattern_length", "replacement_length", "noop_fraction",
    "occurrence_set", "semantic_kind", "semantic_k", "constrain_replacement",
    "power_law_shape", "holdout_instructions", "test_examples", "out_dir",
}
_CROSS_KEYS = (_REWRITE_KEYS - {"semantic_kind", "semantic_k"}) | {
    "name", "train_classes", "test_class",
}
_CIPHER_KEYS = {
    "kind", "seed", "train_size", "test_size", "noop_fraction",
    "train_dictionary", "test_dictionary", "corpus", "out_dir",
}


class ConfigError(ValueError):
    pass


def load_config(path: Path) -> dict:
    with open(path, "rb") as handle:
        config = tomllib.load(handle)
    nested = [key for key, value in config.items() if isinstance(value, dict)]
    if nested:
        raise ConfigError(f"config must be flat; nested table(s): {nested}")
    if "seed" not in config:
        raise ConfigError("config must declare a seed")
    kind = config.get("kind", "rewrite")
    allowed = {"rewrite": _REWRITE_KEYS, "cross_class": _CROSS_KEYS, "cipher": _CIPHER_KEYS}
    if kind not in allowed:
        raise ConfigError(f"unknown config kind {kind!r}")
    unknown = sorted(set(config) - allowed[kind])
    if unknown:
        raise ConfigError(f"unknown config key(s) for kind {kind!r}: {unknown}")
    config["kind"] = kind
    return config


def _parse_class(spec: str) -> SemanticClass:
    if ":" in spec:
        kind, _, k = spec.partition(":")
        return SemanticClass(kind, int(k))
    return SemanticClass(spec)


def _dataset_config(config: dict) -> DatasetConfig:
    kwargs = {}
    for key in (
        "seed", "num_instructions", "examples_per_instruction", "total_examples",
        "input_length", "pattern_length", "replacement_length", "noop_fraction",
        "constrain_replacement", "holdout_instructions", "test_examples",
    ):
        if key in config:
            kwargs[key] = config[key]
    if "occurrence_set" in config:
        kwargs["occurrence_set"] = tuple(config["occurrence_set"])
    if "semantic_kind" in config or "semantic_k" in config:
        kwargs["semantic_class"] = SemanticClass(
            config.get("semantic_kind", "unconstrained"), config.get("semantic_k", 1)
        )
    if "power_law_shape" in config:
        kwargs["power_law"] = PowerLawSpec(config["power_law_shape"])
    try:
        return DatasetConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _cleanup_outputs(out_dir: Path) -> None:
    for name in ("train.jsonl", "test.jsonl", "manifest.json"):
        (out_dir / name).unlink(missing_ok=True)


def cmd_gen(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config))
    if args.seed is not None:
        config["seed"] = args.seed
    out_dir = Path(args.out or config.get("out_dir") or "dataset")
    kind = config["kind"]
    if kind == "cipher":
        return _generate_cipher(config, out_dir)
    dataset_config = _dataset_config(
        {k: v for k, v in config.items() if k not in ("kind", "out_dir", "name", "train_classes", "test_class")}
    )
    if kind == "rewrite":
        target_dir = out_dir
        emit = lambda: make_dataset(dataset_config, out_dir, jobs=args.jobs)  # noqa: E731
    else:
        cc = CrossClassConfig(
            name=config.get("name", "pair"),
            config=dataset_config,
            train_classes=tuple(_parse_class(s) for s in config["train_classes"]),
            test_class=_parse_class(config["test_class"]),
        )
        target_dir = out_dir / cc.name
        emit = lambda: cross_class_splits([cc], out_dir, jobs=args.jobs)[0]  # noqa: E731
    try:
        manifest = emit()
    except Exception:
        _cleanup_outputs(target_dir)
        raise
    print(f"wrote {target_dir}")
    print(f"checksum: {manifest.checksum}")
    return 0


def _generate_cipher(config: dict, out_dir: Path) -> int:
    train_dict = Dictionary.load(
        Path(config["train_dictionary"]) if "train_dictionary" in config
        else bundled_path("cipher_train_words.txt"),
        "train",
    )
    test_dict = Dictionary.load(
        Path(config["test_dictionary"]) if "test_dictionary" in config
        else bundled_path("cipher_test_words.txt"),
        "test",
    )
    try:
        manifest = make_cipher_dataset(
            train_dict,
            test_dict,
            out_dir,
            train_size=config.get("train_size", 40_000),
            test_size=config.get("test_size", 5_000),
            noop_fraction=config.get("noop_fraction", 0.4),
            seed=config["seed"],
            corpus_path=Path(config["corpus"]) if config.get("corpus") else None,
        )
    except Exception:
        _cleanup_outputs(out_dir)
        raise
    print(f"wrote {out_dir}")
    print(f"checksum: {manifest['checksum']}")
    return 0


def cmd_cipher_gen(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config))
    if config["kind"] != "cipher":
        raise ConfigError("cipher-gen requires a config with kind = \"cipher\"")
    if args.seed is not None:
        config["seed"] = args.seed
    return _generate_cipher(config, Path(args.out or config.get("out_dir") or "cipher_dataset"))


def cmd_run(args: argparse.Namespace) -> int:
    program = parse_program_file(Path(args.program))
    outcome = run(program, args.input, step_limit=args.step_limit)
    if args.trace:
        for ts in outcome.trace:
            print(
                f"{program.render(ts.before)} -> {program.render(ts.after)} "
                f"(by {program.rule_label(ts.rule_index)})"
            )
    print(program.render(outcome.final))
    print(f"status: {outcome.status} ({len(outcome.trace)} steps)")
    return 0


def _parse_meta(pairs: list[str]) -> dict:
    meta = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--meta expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            meta[key] = json.loads(value)
        except json.JSONDecodeError:
            meta[key] = value
    return meta


def cmd_eval(args: argparse.Namespace) -> int:
    reference = read_reference(Path(args.reference))
    if args.baseline == "copy":
        if args.predictions:
            raise ConfigError("give either a predictions file or --baseline copy, not both")
        predictions = copy_baseline(reference)
        if args.emit_baseline:
            with open(args.emit_baseline, "w", encoding="utf-8") as handle:
                for example_id in range(len(reference)):
                    handle.write(json.dumps(
                        {"example_id": example_id, "prediction": predictions[example_id]}
                    ) + "\n")
            print(f"wrote {args.emit_baseline}")
    else:
        if not args.predictions:
            raise ConfigError("predictions file required (or use --baseline copy)")
        predictions = read_predictions(Path(args.predictions))
    report = score_records(reference, predictions, meta=_parse_meta(args.meta))
    if args.out:
        report.write(Path(args.out))
        print(f"wrote {args.out}")
    if args.text or not args.out:
        print(report.render_text())
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    points = []
    report_paths = sorted(Path(args.reports).glob("*.json"))
    for path in report_paths:
        payload = json.loads(path.read_text(encoding="utf-8"))
        meta = payload.get("meta", {})
        if args.key not in meta:
            raise ScoringError(f"{path}: report meta lacks key {args.key!r}")
        point = SimpleNamespace(
            total_accuracy=payload["total"]["accuracy"],
            hasop_accuracy=payload["hasop"]["accuracy"],
            noop_accuracy=payload["noop"]["accuracy"],
        )
        points.append((float(meta[args.key]), point))
    table = curve(points, key_name=args.key)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rewritebench",
        description="Markov rewrite engine, benchmark generator, and scorer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a dataset from a config file")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", help="output directory (overrides config out_dir)")
    gen.add_argument("--seed", type=int, help="override the config seed")
    gen.add_argument("--jobs", type=int, default=1, help="worker count; output is identical for any value")
    gen.set_defaults(func=cmd_gen)

    cgen = sub.add_parser("cipher-gen", help="generate an encrypted-rewriting dataset")
    cgen.add_argument("--config", required=True)
    cgen.add_argument("--out")
    cgen.add_argument("--seed", type=int)
    cgen.set_defaults(func=cmd_cipher_gen)

    runp = sub.add_parser("run", help="run a Markov program on an input string")
    runp.add_argument("program", help="program file path")
    runp.add_argument("input", help="input string")
    runp.add_argument("--trace", action="store_true", help="print one line per rewrite")
    runp.add_argument("--step-limit", type=int, default=DEFAULT_STEP_LIMIT)
    runp.set_defaults(func=cmd_run)

    evalp = sub.add_parser("eval", help="score predictions against a reference file")
    evalp.add_argument("reference")
    evalp.add_argument("predictions", nargs="?")
    evalp.add_argument("--out", help="write the report JSON here")
    evalp.add_argument("--text", action="store_true", help="also print the text summary")
    evalp.add_argument("--baseline", choices=["copy"], help="score a built-in baseline predictor")
    evalp.add_argument("--emit-baseline", metavar="PATH",
                       help="with --baseline, also write its predictions as JSONL")
    evalp.add_argument("--meta", action="append", default=[], metavar="KEY=VALUE",
                       help="attach metadata to the report (repeatable)")
    evalp.set_defaults(func=cmd_eval)

    curvep = sub.add_parser("curve", help="assemble a CSV curve from report files")
    curvep.add_argument("--reports", required=True, help="directory of report JSON files")
    curvep.add_argument("--key", default="num_instructions", help="meta key for the x axis")
    curvep.add_argument("--out", help="CSV output path")
    curvep.set_defaults(func=cmd_curve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GenerationError, CipherGenerationError, ScoringError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
