import pytest

from relbelief.core import RandomSource

# (criterion, label, passed, detail) lines collected by the acceptance suite
ACCEPTANCE_LINES: list[tuple[str, str, bool, str]] = []


@pytest.fixture
def src():
    return RandomSource(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, label, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {crit} {label}: {detail}")
