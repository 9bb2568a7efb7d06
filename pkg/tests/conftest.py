import contextlib

import pytest

ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def record(name):
        detail = {}
        try:
            yield detail
        except BaseException:
            ACCEPTANCE.append(("FAIL", name, detail.get("info", "")))
            raise
        ACCEPTANCE.append(("PASS", name, detail.get("info", "")))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, info in ACCEPTANCE:
        line = f"{status}  {name}"
        if info:
            line += f"  ({info})"
        terminalreporter.write_line(line)
