from __future__ import annotations

import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one acceptance line: ``record(number, title, passed, detail)``.

    Several calls for the same number are merged; the criterion passes only
    if all parts pass.
    """

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        if number in _ACCEPTANCE:
            _, old_ok, old_detail = _ACCEPTANCE[number]
            _ACCEPTANCE[number] = (title, old_ok and passed, f"{old_detail}; {detail}")
        else:
            _ACCEPTANCE[number] = (title, bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number:2d} {title}: {detail}")
