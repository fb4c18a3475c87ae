import pytest

_LINES: list[str] = []


class _Criterion:
    def __init__(self, capsys):
        self.capsys = capsys

    def __call__(self, number, title, check):
        """Run ``check()``; print one PASS/FAIL line and re-raise on failure."""
        try:
            detail = check()
        except AssertionError as exc:
            self._emit(f"criterion {number} FAIL  {title}: {exc}")
            raise
        self._emit(f"criterion {number} PASS  {title}" + (f": {detail}" if detail else ""))

    def _emit(self, line):
        _LINES.append(line)
        with self.capsys.disabled():
            print("\n" + line)


@pytest.fixture
def criterion(capsys):
    return _Criterion(capsys)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
