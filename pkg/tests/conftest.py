import random
from fractions import Fraction

import pytest

from groupmms.core import Instance

# lines collected by test_acceptance.py, printed in the terminal summary
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def random_rational(rng: random.Random) -> Fraction:
    num = rng.choice([0, 0] + list(range(1, 21)))
    return Fraction(num, rng.choice([1, 1, 2, 3, 4, 6]))


def random_instance(rng: random.Random, shape, m) -> Instance:
    return Instance(
        m=m,
        groups=tuple(
            tuple(tuple(random_rational(rng) for _ in range(m)) for _ in range(n)) for n in shape
        ),
    )


@pytest.fixture
def rng():
    return random.Random(20170621)
