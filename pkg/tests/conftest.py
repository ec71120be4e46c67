"""Shared fixtures, and the one-line-per-criterion acceptance summary."""

import pytest

RESULTS = {}


@pytest.fixture
def detail(request):
    """Attach a short measured summary to the test's criterion line."""
    def record(text):
        request.node.user_properties.append(("detail", text))
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, title = mark.args
    details = [v for k, v in item.user_properties if k == "detail"]
    ok, prev, _ = RESULTS.get(number, (True, [], title))
    RESULTS[number] = (ok and rep.passed, prev + details, title)


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(RESULTS):
        ok, details, title = RESULTS[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if details:
            line += "  [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)
