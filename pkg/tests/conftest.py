"""Prints one PASS/FAIL line per acceptance criterion after the run."""

import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results = {}


@pytest.fixture
def report(request):
    """Attach a one-line measurement to the current acceptance test."""

    def note(text):
        request.node.user_properties.append(("detail", text))

    return note


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    if report.when == "call" or report.outcome != "passed":
        number = int(match.group(1))
        detail = "; ".join(v for k, v in report.user_properties if k == "detail")
        failed = report.outcome != "passed" or hasattr(report, "wasxfail")
        previous = _results.get(number)
        if previous is None or not previous[0] or failed:
            _results[number] = (not failed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        passed, detail = _results[number]
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}"
        terminalreporter.write_line(f"{line}  {detail}" if detail else line)
