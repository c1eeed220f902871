import math

import pytest

from mutualfront.model import ModelParams

_ACCEPTANCE_LINES: list[str] = []

THRESH = (0.5 * math.pi) ** 2


@pytest.fixture
def weak():
    return ModelParams(d1=1.0, d2=1.0, a1=1.0, a2=1.0, b1=2.0, b2=1.0, c1=1.0, c2=2.0, mu=1.0, b=1.0)


@pytest.fixture
def strong():
    return ModelParams(d1=1.0, d2=1.0, a1=2 * THRESH, a2=2 * THRESH, b1=1.0, b2=2.0, c1=2.0, c2=1.0,
                       mu=1.0, b=1.0)


@pytest.fixture
def acceptance_log():
    """Record one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
