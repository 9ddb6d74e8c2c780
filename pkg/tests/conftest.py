import pytest

from maxreg import NormSpec, Square, generate, make_grid

ACCEPTANCE_LINES: list[str] = []

FOUR_NORMS = [NormSpec.linf(), NormSpec.lp(1), NormSpec.lp(2), NormSpec.rect((2.0, 1.0))]


@pytest.fixture
def square16():
    grid = make_grid(2, 2.0, 1 / 16)
    return generate(Square(1.0), grid)


@pytest.fixture
def grid8():
    return make_grid(2, 2.0, 1 / 8)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
