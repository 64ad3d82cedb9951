import pytest

_ACCEPTANCE = {}


@pytest.fixture
def acceptance_log(request):
    """Record one summary line for an acceptance criterion."""
    def log(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE[label] = line
        print(line)
        return ok
    return log


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0].lstrip("C"))):
        terminalreporter.write_line(_ACCEPTANCE[label])
