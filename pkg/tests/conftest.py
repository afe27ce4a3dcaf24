import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def record(request):
    """record(label, ok, detail): one acceptance line, echoed in the terminal summary."""
    lines = request.config.stash[_LINES]

    def _record(label, ok, detail):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance")
    for line in lines:
        terminalreporter.write_line(line)
