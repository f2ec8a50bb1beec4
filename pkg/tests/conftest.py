import pytest

ACCEPTANCE_IDS = range(1, 13)
_results: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Store one acceptance outcome; the terminal summary prints them all."""
    def _record(criterion: int, ok: bool, detail: str) -> bool:
        _results[criterion] = (bool(ok), detail)
        return bool(ok)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for i in ACCEPTANCE_IDS:
        if i in _results:
            ok, detail = _results[i]
            terminalreporter.write_line(f"ACCEPTANCE {i:2d} {'PASS' if ok else 'FAIL'}: {detail}")
        else:
            terminalreporter.write_line(f"ACCEPTANCE {i:2d} NOT RUN")
