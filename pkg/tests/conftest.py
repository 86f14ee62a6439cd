import pytest

_lines = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion, echoed in the terminal summary."""
    lines = request.config.stash.setdefault(_lines, [])

    def record(number, ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        print(lines[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_lines, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
