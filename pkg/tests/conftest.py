import pytest

from icdisp.channel import EXAMPLE_CHANNEL

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def ch():
    return EXAMPLE_CHANNEL


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
