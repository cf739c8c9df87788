import pytest

# one line per acceptance criterion, filled in by test_acceptance
VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    def record(name, ok, detail):
        VERDICTS.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
