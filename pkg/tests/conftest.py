"""Shared fixtures; collects acceptance verdicts and prints one line per criterion."""

import pytest

RESULTS = {}


@pytest.fixture
def verdict():
    def record(number, ok, detail):
        RESULTS[number] = (bool(ok), detail)
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
