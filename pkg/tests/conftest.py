import pytest
from hypothesis import settings

# several properties run numerical solvers or build codes; wall-clock limits only add flakiness
settings.register_profile("walshmary", deadline=None)
settings.load_profile("walshmary")

_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert."""

    def check(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
