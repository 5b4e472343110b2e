import pytest

_CRITERIA: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record the verdict of an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _CRITERIA.append((number, title, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} | {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_CRITERIA):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number}. {title} | {detail}")
