import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance check and return the verdict."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def _report(ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {request.node.name}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
