import pytest

_RESULTS: list[tuple[str, bool, str]] = []


class _Criterion:
    def __init__(self, name: str):
        self.name = name
        self.detail = ""

    def note(self, text: str) -> None:
        self.detail = text


@pytest.fixture
def criterion(request):
    """Records one acceptance line per test; printed in the terminal summary."""
    mark = request.node.get_closest_marker("criterion")
    c = _Criterion(mark.args[0] if mark else request.node.name)
    yield c
    # outcome is attached by the hook below
    request.node._criterion = c


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "teardown" and hasattr(item, "_criterion"):
        c = item._criterion
        passed = getattr(item, "_call_passed", False)
        _RESULTS.append((c.name, passed, c.detail))
    elif rep.when == "call":
        item._call_passed = rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _RESULTS:
        line = f"{'PASS' if passed else 'FAIL'}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
