import pytest

from hartree_decay.acceptance import AcceptanceContext

_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_context():
    return AcceptanceContext(fast=False, seed=0)


@pytest.fixture(scope="session")
def criterion_lines():
    return _LINES


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
