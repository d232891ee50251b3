import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """``acceptance(n, ok, detail)`` prints a pass/fail line and asserts ``ok``."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
