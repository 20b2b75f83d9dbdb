import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def record():
    """Store one acceptance line; tests call it before asserting."""

    def _record(number: int, name: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE[number] = (name, bool(ok), detail)
        print(f"criterion {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        name, ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {name}: {detail}")
