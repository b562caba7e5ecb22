"""Markov-algorithm rewrite engine, rewrite-task benchmark generator, and
exact-match evaluation harness."""

from importlib import resources

from rewritebench.engine import (
    Alphabet,
    MarkovProgram,
    Rule,
    RuleSchema,
    RunOutcome,
    TraceStep,
    apply_rule_once,
    expand_schema,
    parse_program,
    parse_program_file,
    run,
    step,
)

__all__ = [
    "Alphabet",
    "MarkovProgram",
    "Rule",
    "RuleSchema",
    "RunOutcome",
    "TraceStep",
    "apply_rule_once",
    "expand_schema",
    "parse_program",
    "parse_program_file",
    "run",
    "step",
    "bundled_path",
]

__version__ = "0.1.0"


def bundled_path(name: str):
    """Path to a data file shipped with the package (programs, word lists)."""
    return resources.files("rewritebench").joinpath("data", name)
