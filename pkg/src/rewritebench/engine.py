"""Markov-algorithm rewrite engine.

An algorithm is an ordered list of rewrite rules over an extended alphabet.
One step applies the first rule (lowest index) whose left-hand side occurs in
the current string, replacing its leftmost occurrence. The run ends when a
stop rule fires (its replacement is still performed), when no rule matches
(blocked), or when the step budget is exhausted.

Rules may be schematic: a rule template with variable symbols expands into one
ground rule per assignment of variables to letters, in lexicographic order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

DEFAULT_STEP_LIMIT = 10_000
STOP_MARKER = "·"

TERMINATED = "terminated"
BLOCKED = "blocked"
STEP_LIMIT = "step_limit"

DEFAULT_BASE = tuple("abcdefghijklmnopqrstuvwxyz")

# Internal stand-ins for multi-character symbol names (private use area).
_RESERVED_START = 0xE000


class ProgramSyntaxError(ValueError):
    """Raised by parse_program on malformed program text."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Alphabet:
    """Symbol universe: base letters, auxiliary letters, and the stop marker.

    All symbols are single characters internally; the three groups are
    pairwise disjoint and the base is non-empty.
    """

    base: tuple[str, ...] = DEFAULT_BASE
    extension: tuple[str, ...] = ()
    stop_marker: str = STOP_MARKER

    def __post_init__(self) -> None:
        if not self.base:
            raise ValueError("alphabet base must be non-empty")
        for group_name, group in (("base", self.base), ("extension", self.extension)):
            for sym in group:
                if len(sym) != 1:
                    raise ValueError(f"{group_name} symbol {sym!r} is not a single character")
        if len(self.stop_marker) != 1:
            raise ValueError("stop marker must be a single character")
        base_set, ext_set = set(self.base), set(self.extension)
        if len(base_set) != len(self.base) or len(ext_set) != len(self.extension):
            raise ValueError("duplicate symbol within a group")
        if base_set & ext_set or self.stop_marker in base_set | ext_set:
            raise ValueError("base, extension, and stop marker must be pairwise disjoint")

    @property
    def symbols(self) -> frozenset[str]:
        """All symbols valid inside rule strings and sequences."""
        return frozenset(self.base) | frozenset(self.extension)


@dataclass(frozen=True)
class Rule:
    """Ground rewrite rule lhs -> rhs.

    A stop rule still performs its replacement; termination semantics live in
    is_stop, never in the strings themselves. source_index records which
    source-file rule the ground rule was expanded from (0-based), when known.
    """

    lhs: str
    rhs: str
    is_stop: bool = False
    source_index: Optional[int] = None

    def __post_init__(self) -> None:
        if STOP_MARKER in self.lhs or STOP_MARKER in self.rhs:
            raise ValueError("stop marker may not appear inside rule strings")


@dataclass(frozen=True)
class RuleSchema:
    """Rule template whose variable symbols range over letters.

    Every variable used in the output template must also occur in the input
    template; otherwise expansion would have to invent symbols.
    """

    lhs_template: str
    rhs_template: str
    variables: tuple[str, ...]
    is_stop: bool = False

    def __post_init__(self) -> None:
        var_set = set(self.variables)
        free = [v for v in self.rhs_template if v in var_set and v not in self.lhs_template]
        if free:
            raise ValueError(f"free output variable(s) {sorted(set(free))!r} not bound by the left-hand side")

    def occurring_variables(self) -> tuple[str, ...]:
        """Variables in first-appearance order over (lhs, then rhs)."""
        seen: list[str] = []
        var_set = set(self.variables)
        for sym in self.lhs_template + self.rhs_template:
            if sym in var_set and sym not in seen:
                seen.append(sym)
        return tuple(seen)


@dataclass(frozen=True)
class TraceStep:
    """One applied rewrite: rule_index into the ground rule list, leftmost
    match offset, and the string before/after the splice."""

    rule_index: int
    position: int
    before: str
    after: str


@dataclass(frozen=True)
class RunOutcome:
    status: str  # TERMINATED, BLOCKED, or STEP_LIMIT
    final: str
    trace: tuple[TraceStep, ...]


@dataclass(frozen=True)
class MarkovProgram:
    """Ordered ground rules over an alphabet. Rule order is significant.

    display_names maps internal reserved characters back to declared
    multi-character symbol names, for rendering only.
    """

    alphabet: Alphabet
    rules: tuple[Rule, ...]
    display_names: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self) -> None:
        valid = self.alphabet.symbols
        for i, rule in enumerate(self.rules):
            bad = set(rule.lhs + rule.rhs) - valid
            if bad:
                raise ValueError(f"rule {i} uses symbol(s) outside the alphabet: {sorted(bad)!r}")

    def render(self, seq: str) -> str:
        """Map internal reserved characters back to their declared names."""
        if not self.display_names:
            return seq
        table = dict(self.display_names)
        return "".join(table.get(ch, ch) for ch in seq)

    def rule_label(self, rule_index: int) -> int:
        """1-based source rule number for display, matching program listings."""
        src = self.rules[rule_index].source_index
        return (src if src is not None else rule_index) + 1


def apply_rule_once(rule: Rule, seq: str) -> Optional[tuple[str, int]]:
    """Replace the leftmost occurrence of rule.lhs in seq by rule.rhs.

    Returns (result, match offset), or None when the lhs does not occur.
    An empty lhs matches at offset 0, prepending the rhs.
    """
    pos = seq.find(rule.lhs)
    if pos < 0:
        return None
    return seq[:pos] + rule.rhs + seq[pos + len(rule.lhs):], pos


def step(program: MarkovProgram, seq: str) -> Optional[TraceStep]:
    """Apply the first rule whose lhs occurs in seq, at its leftmost offset.

    Returns None when no rule matches (the blocked state).
    """
    for index, rule in enumerate(program.rules):
        pos = seq.find(rule.lhs)
        if pos >= 0:
            after = seq[:pos] + rule.rhs + seq[pos + len(rule.lhs):]
            return TraceStep(rule_index=index, position=pos, before=seq, after=after)
    return None


def run(program: MarkovProgram, seq: str, step_limit: int = DEFAULT_STEP_LIMIT) -> RunOutcome:
    """Iterate steps until a stop rule fires, no rule matches, or the budget runs out.

    Hitting the budget on a string that no rule matches reports BLOCKED, not
    STEP_LIMIT: the status describes the string the run ended on.
    """
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    trace: list[TraceStep] = []
    current = seq
    for _ in range(step_limit):
        applied = step(program, current)
        if applied is None:
            return RunOutcome(BLOCKED, current, tuple(trace))
        trace.append(applied)
        current = applied.after
        if program.rules[applied.rule_index].is_stop:
            return RunOutcome(TERMINATED, current, tuple(trace))
    status = BLOCKED if step(program, current) is None else STEP_LIMIT
    return RunOutcome(status, current, tuple(trace))


def expand_schema(
    schema: RuleSchema,
    alphabet: Alphabet,
    variable_domain: Iterable[str],
) -> list[Rule]:
    """Ground a schema over every assignment of its variables to the domain.

    Assignments are enumerated lexicographically by alphabet order, keyed on
    (first variable, second variable, ...) in order of first appearance.
    Distinct variables are assigned independently and may coincide.
    """
    domain = set(variable_domain)
    outside = domain - set(alphabet.base)
    if outside:
        raise ValueError(f"variable domain symbol(s) {sorted(outside)!r} outside the base alphabet")
    occurring = schema.occurring_variables()
    if not occurring:
        return [Rule(schema.lhs_template, schema.rhs_template, is_stop=schema.is_stop)]
    ordered_domain = [sym for sym in alphabet.base if sym in domain]
    rules = []
    for assignment in itertools.product(ordered_domain, repeat=len(occurring)):
        binding = dict(zip(occurring, assignment))
        lhs = "".join(binding.get(ch, ch) for ch in schema.lhs_template)
        rhs = "".join(binding.get(ch, ch) for ch in schema.rhs_template)
        rules.append(Rule(lhs, rhs, is_stop=schema.is_stop))
    return rules


class _SymbolTable:
    """Declared symbol names, with reserved single-character stand-ins for
    multi-character names and longest-match tokenization of rule text."""

    def __init__(self) -> None:
        self.by_name: dict[str, str] = {}  # declared name -> internal char
        self.display: dict[str, str] = {}  # internal char -> declared name
        self._next_reserved = _RESERVED_START

    def declare(self, name: str, line_no: int) -> str:
        if name in self.by_name:
            raise ProgramSyntaxError(line_no, f"symbol {name!r} declared twice")
        if len(name) == 1:
            internal = name
        else:
            internal = chr(self._next_reserved)
            self._next_reserved += 1
            self.display[internal] = name
        self.by_name[name] = internal
        return internal

    def tokenize(self, text: str, line_no: int) -> str:
        """Longest-match tokenize rule text into internal characters."""
        out: list[str] = []
        names_by_length = sorted(self.by_name, key=len, reverse=True)
        i = 0
        while i < len(text):
            for name in names_by_length:
                if text.startswith(name, i):
                    out.append(self.by_name[name])
                    i += len(name)
                    break
            else:
                raise ProgramSyntaxError(line_no, f"unknown symbol at {text[i:]!r}")
        return "".join(out)


def parse_program(text: str) -> MarkovProgram:
    """Parse program text into a MarkovProgram with schemas expanded in place.

    Format, one item per line: `alphabet: <names>` (whitespace-separated,
    default a-z when omitted), `aux: <names>`, `vars: <names> in <names>`,
    rules `LHS -> RHS` (`-> RHS` for an empty LHS; a leading `.` on the RHS
    marks a stop rule), and `#` comments.
    """
    table = _SymbolTable()
    base: list[str] = []
    extension: list[str] = []
    var_domains: dict[str, tuple[str, ...]] = {}  # variable internal char -> domain
    seen_alphabet = False
    seen_aux = False
    # (line_no, lhs_text, rhs_text) until symbols are settled
    pending_rules: list[tuple[int, str, str]] = []

    def declare_all(names: list[str], line_no: int) -> list[str]:
        return [table.declare(name, line_no) for name in names]

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            if seen_alphabet:
                raise ProgramSyntaxError(line_no, "duplicate alphabet declaration")
            seen_alphabet = True
            names = line[len("alphabet:"):].split()
            if not names:
                raise ProgramSyntaxError(line_no, "empty alphabet declaration")
            base = declare_all(names, line_no)
        elif line.startswith("aux:"):
            if seen_aux:
                raise ProgramSyntaxError(line_no, "duplicate aux declaration")
            seen_aux = True
            extension = declare_all(line[len("aux:"):].split(), line_no)
        elif line.startswith("vars:"):
            rest = line[len("vars:"):].split()
            if "in" not in rest:
                raise ProgramSyntaxError(line_no, "vars line must read 'vars: <names> in <names>'")
            split_at = rest.index("in")
            var_names, domain_names = rest[:split_at], rest[split_at + 1:]
            if not var_names or not domain_names:
                raise ProgramSyntaxError(line_no, "vars line must name variables and a domain")
            domain = tuple(domain_names)
            for internal in declare_all(var_names, line_no):
                var_domains[internal] = domain
        elif "->" in line:
            lhs_text, _, rhs_text = line.partition("->")
            if "->" in rhs_text:
                raise ProgramSyntaxError(line_no, "more than one '->' in rule")
            pending_rules.append((line_no, lhs_text, rhs_text))
        else:
            raise ProgramSyntaxError(line_no, f"unrecognized line {line!r}")

    if not seen_alphabet:
        collisions = [name for name in DEFAULT_BASE if name in table.by_name]
        if collisions:
            raise ValueError(
                f"symbol(s) {collisions!r} collide with the default a-z alphabet; "
                "declare an explicit alphabet line"
            )
        base = declare_all(list(DEFAULT_BASE), 0)
    if not pending_rules:
        raise ProgramSyntaxError(len(text.splitlines()) or 1, "program must contain at least one rule")

    alphabet = Alphabet(base=tuple(base), extension=tuple(extension))
    # Resolve variable domains to internal characters and check they are base letters.
    resolved_domains: dict[str, tuple[str, ...]] = {}
    for var, domain_names in var_domains.items():
        missing = [name for name in domain_names if name not in table.by_name]
        if missing:
            raise ValueError(f"variable domain names {missing!r} are not declared symbols")
        resolved_domains[var] = tuple(table.by_name[name] for name in domain_names)

    rules: list[Rule] = []
    for source_index, (line_no, lhs_text, rhs_text) in enumerate(pending_rules):
        lhs_compact = "".join(lhs_text.split())
        rhs_compact = "".join(rhs_text.split())
        is_stop = rhs_compact.startswith(".")
        if is_stop:
            rhs_compact = rhs_compact[1:]
        lhs = table.tokenize(lhs_compact, line_no)
        rhs = table.tokenize(rhs_compact, line_no)
        used_vars = [v for v in dict.fromkeys(lhs + rhs) if v in resolved_domains]
        if not used_vars:
            rules.append(Rule(lhs, rhs, is_stop=is_stop, source_index=source_index))
            continue
        domains = {resolved_domains[v] for v in used_vars}
        if len(domains) > 1:
            raise ProgramSyntaxError(line_no, "all variables in one rule must share a domain")
        schema = RuleSchema(lhs, rhs, variables=tuple(used_vars), is_stop=is_stop)
        for ground in expand_schema(schema, alphabet, next(iter(domains))):
            rules.append(Rule(ground.lhs, ground.rhs, is_stop=ground.is_stop, source_index=source_index))

    return MarkovProgram(
        alphabet=alphabet,
        rules=tuple(rules),
        display_names=tuple(sorted(table.display.items())),
    )


def parse_program_file(path) -> MarkovProgram:
    with open(path, encoding="utf-8") as handle:
        return parse_program(handle.read())
