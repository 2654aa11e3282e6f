import pytest

_VERDICTS: dict[str, str] = {}


@pytest.fixture
def verdict():
    """Record one acceptance line: ``verdict("3", ok, "detail")``."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _VERDICTS[label] = f"criterion {label:<4} {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_VERDICTS, key=lambda s: (int("".join(c for c in s if c.isdigit())), s)):
        terminalreporter.write_line(_VERDICTS[label])
