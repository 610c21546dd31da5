import os

import pytest

# (criterion number, title, status, detail), filled in by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[int, str, str, str]] = []


def pytest_collection_modifyitems(config, items):
    if os.environ.get("CSVT_PERF") == "1":
        return
    skip = pytest.mark.skip(reason="performance smoke test; set CSVT_PERF=1 to run")
    for item in items:
        if "perf" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, status, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{num:2d}] {status:<7} {title}: {detail}")
