import pytest

from rewritebench import bundled_path, parse_program

# The reversal program's fully worked run on "abb": (after-string, 1-based
# source rule) per step, ending terminated on "abbbba".
GOLDEN_ABB_TRACE = [
    ("αabb", 5),
    ("aαβabb", 1),
    ("aαbβab", 2),
    ("abαβbβab", 1),
    ("abαβbbβa", 2),
    ("abαbβbβa", 2),
    ("abbαβbβbβa", 1),
    ("abbbαβbβa", 3),
    ("abbbbαβa", 3),
    ("abbbbaα", 3),
    ("abbbba", 4),
]


@pytest.fixture(scope="session")
def reverse_program():
    return parse_program(bundled_path("reverse.mk").read_text(encoding="utf-8"))
