import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rewritebench.engine import (
    BLOCKED,
    STEP_LIMIT,
    TERMINATED,
    Alphabet,
    MarkovProgram,
    ProgramSyntaxError,
    Rule,
    RuleSchema,
    apply_rule_once,
    expand_schema,
    parse_program,
    run,
    step,
)
from conftest import GOLDEN_ABB_TRACE


def naive_leftmost_splice(lhs, rhs, seq):
    """Independent oracle: scan every offset, splice at the first slice match."""
    for i in range(len(seq) - len(lhs) + 1):
        if seq[i:i + len(lhs)] == lhs:
            return seq[:i] + rhs + seq[i + len(lhs):], i
    return None


class TestApplyRuleOnce:
    def test_leftmost_occurrence(self):
        assert apply_rule_once(Rule("ss", "tr"), "mississipi") == ("mitrissipi", 2)

    def test_identity_replacement_reports_position(self):
        assert apply_rule_once(Rule("ab", "ab"), "xxabxx") == ("xxabxx", 2)

    def test_absent_pattern(self):
        assert apply_rule_once(Rule("qq", "z"), "abc") is None

    def test_empty_lhs_prepends(self):
        assert apply_rule_once(Rule("", "xy"), "abc") == ("xyabc", 0)

    @settings(max_examples=300)
    @given(
        lhs=st.text(alphabet="ab", min_size=0, max_size=4),
        rhs=st.text(alphabet="ab", min_size=0, max_size=4),
        seq=st.text(alphabet="ab", min_size=0, max_size=20),
    )
    def test_matches_naive_oracle(self, lhs, rhs, seq):
        assert apply_rule_once(Rule(lhs, rhs), seq) == naive_leftmost_splice(lhs, rhs, seq)


class TestStep:
    def test_empty_lhs_rule_fires_when_nothing_else_matches(self, reverse_program):
        applied = step(reverse_program, "abb")
        assert applied is not None
        assert applied.after == "αabb"
        assert reverse_program.rule_label(applied.rule_index) == 5

    def test_blocked_returns_none(self):
        program = MarkovProgram(Alphabet(), (Rule("a", "b"),))
        assert step(program, "ccc") is None

    def test_first_matching_rule_wins(self, reverse_program):
        applied = step(reverse_program, "αabb")
        assert applied is not None
        assert applied.after == "aαβabb"
        assert reverse_program.rule_label(applied.rule_index) == 1

    def test_leftmost_and_first_rule_properties(self):
        rng = random.Random(7)
        alphabet = Alphabet(base=tuple("ab"))
        for _ in range(500):
            rules = tuple(
                Rule(
                    "".join(rng.choice("ab") for _ in range(rng.randint(1, 3))),
                    "".join(rng.choice("ab") for _ in range(rng.randint(0, 3))),
                )
                for _ in range(rng.randint(1, 4))
            )
            program = MarkovProgram(alphabet, rules)
            seq = "".join(rng.choice("ab") for _ in range(rng.randint(0, 12)))
            applied = step(program, seq)
            if applied is None:
                assert all(rule.lhs not in seq for rule in rules)
                continue
            rule = rules[applied.rule_index]
            # No earlier rule matches anywhere, and no earlier offset matches this rule.
            assert all(r.lhs not in seq for r in rules[:applied.rule_index])
            assert all(
                seq[i:i + len(rule.lhs)] != rule.lhs for i in range(applied.position)
            )
            expected, pos = naive_leftmost_splice(rule.lhs, rule.rhs, seq)
            assert (applied.after, applied.position) == (expected, pos)


class TestRun:
    def test_golden_abb_trace(self, reverse_program):
        outcome = run(reverse_program, "abb")
        assert outcome.status == TERMINATED
        assert outcome.final == "abbbba"
        assert len(outcome.trace) == len(GOLDEN_ABB_TRACE)
        for got, (after, label) in zip(outcome.trace, GOLDEN_ABB_TRACE):
            assert got.after == after
            assert reverse_program.rule_label(got.rule_index) == label

    def test_stop_rule_applies_replacement_then_halts(self):
        program = MarkovProgram(Alphabet(), (Rule("a", "", is_stop=True),))
        outcome = run(program, "a")
        assert outcome.status == TERMINATED
        assert outcome.final == ""
        assert len(outcome.trace) == 1

    def test_budget_exhausted_on_blocked_string_reports_blocked(self):
        program = MarkovProgram(Alphabet(), (Rule("ab", "ba"),))
        outcome = run(program, "ab", step_limit=1)
        assert outcome.final == "ba"
        assert len(outcome.trace) == 1
        assert outcome.status == BLOCKED

    def test_budget_exhausted_mid_loop_reports_step_limit(self):
        program = MarkovProgram(Alphabet(), (Rule("a", "a"),))
        outcome = run(program, "a", step_limit=3)
        assert outcome.status == STEP_LIMIT
        assert len(outcome.trace) == 3

    def test_trace_replay_reconstructs_final(self, reverse_program):
        outcome = run(reverse_program, "babba")
        current = "babba"
        for ts in outcome.trace:
            assert ts.before == current
            rule = reverse_program.rules[ts.rule_index]
            assert current[ts.position:ts.position + len(rule.lhs)] == rule.lhs
            current = current[:ts.position] + rule.rhs + current[ts.position + len(rule.lhs):]
            assert current == ts.after
        assert current == outcome.final

    def test_determinism(self, reverse_program):
        first = run(reverse_program, "abab")
        second = run(reverse_program, "abab")
        assert first == second

    @pytest.mark.parametrize("word", ["a", "b", "ab", "ba", "abb", "ababa"])
    def test_reversal_samples(self, reverse_program, word):
        outcome = run(reverse_program, word)
        assert outcome.status == TERMINATED
        assert outcome.final == word + word[::-1]

    def test_unmatched_stop_rule_is_passed_over(self):
        program = MarkovProgram(
            Alphabet(), (Rule("z", "", is_stop=True), Rule("a", "b"))
        )
        outcome = run(program, "aa")
        assert outcome.status == BLOCKED
        assert outcome.final == "bb"

    def test_empty_lhs_stop_rule_prepends_then_halts(self):
        program = MarkovProgram(Alphabet(), (Rule("", "x", is_stop=True),))
        outcome = run(program, "ab")
        assert outcome.status == TERMINATED
        assert outcome.final == "xab"
        assert len(outcome.trace) == 1


class TestExpandSchema:
    def test_single_variable(self):
        alphabet = Alphabet(base=tuple("ab"), extension=("α", "β"))
        schema = RuleSchema("αx", "xαβx", variables=("x",))
        assert expand_schema(schema, alphabet, {"a", "b"}) == [
            Rule("αa", "aαβa"),
            Rule("αb", "bαβb"),
        ]

    def test_two_variables_lexicographic(self):
        alphabet = Alphabet(base=tuple("ab"), extension=("β",))
        schema = RuleSchema("βxy", "yβx", variables=("x", "y"))
        ground = expand_schema(schema, alphabet, {"a", "b"})
        assert [rule.lhs for rule in ground] == ["βaa", "βab", "βba", "βbb"]
        assert [rule.rhs for rule in ground] == ["aβa", "bβa", "aβb", "bβb"]

    def test_no_variables_is_singleton(self):
        alphabet = Alphabet(base=tuple("ab"))
        schema = RuleSchema("ab", "ba", variables=())
        assert expand_schema(schema, alphabet, {"a"}) == [Rule("ab", "ba")]

    def test_free_output_variable_rejected(self):
        with pytest.raises(ValueError, match="free output variable"):
            RuleSchema("a", "y", variables=("y",))

    def test_domain_outside_base_rejected(self):
        alphabet = Alphabet(base=tuple("ab"))
        schema = RuleSchema("x", "x", variables=("x",))
        with pytest.raises(ValueError, match="outside the base"):
            expand_schema(schema, alphabet, {"q"})


class TestParseProgram:
    def test_reverse_program_expansion_counts(self, reverse_program):
        assert len(reverse_program.rules) == 10
        by_source = {}
        for rule in reverse_program.rules:
            by_source.setdefault(rule.source_index, []).append(rule)
        assert [len(by_source[i]) for i in range(5)] == [2, 4, 2, 1, 1]

    def test_expansion_preserves_source_order(self, reverse_program):
        sources = [rule.source_index for rule in reverse_program.rules]
        assert sources == sorted(sources)

    def test_plain_rule_over_default_alphabet(self):
        program = parse_program("ss -> tr\n")
        assert program.rules == (Rule("ss", "tr", source_index=0),)
        assert program.alphabet.base == tuple("abcdefghijklmnopqrstuvwxyz")

    def test_stop_rule_forms(self):
        program = parse_program("alphabet: a\na -> .\n")
        assert program.rules[0] == Rule("a", "", is_stop=True, source_index=0)
        program = parse_program("alphabet: a\na -> .aa\n")
        assert program.rules[0] == Rule("a", "aa", is_stop=True, source_index=0)

    def test_empty_program_rejected(self):
        with pytest.raises(ProgramSyntaxError, match="at least one rule"):
            parse_program("alphabet: a b\n")

    def test_duplicate_alphabet_rejected(self):
        with pytest.raises(ProgramSyntaxError, match="duplicate alphabet"):
            parse_program("alphabet: a\nalphabet: b\na -> a\n")

    def test_unknown_symbol_rejected(self):
        with pytest.raises(ProgramSyntaxError, match="unknown symbol"):
            parse_program("alphabet: a b\nab -> q\n")

    def test_syntax_error_carries_line_number(self):
        with pytest.raises(ProgramSyntaxError, match="line 3"):
            parse_program("alphabet: a\n\nnot a rule\n")

    def test_multicharacter_aux_names(self):
        text = "alphabet: a b\naux: mark\nmark a -> a mark\na -> .\n-> mark\n"
        program = parse_program(text)
        outcome = run(program, "ba")
        assert outcome.status == TERMINATED
        assert dict(program.display_names)
        rendered = program.render(program.rules[0].lhs)
        assert rendered == "marka"

    def test_variable_sharing_letter_with_default_alphabet_rejected(self):
        with pytest.raises(ValueError, match="default a-z"):
            parse_program("vars: x in a\nx -> x\n")
