"""Acceptance bookkeeping.

Tests marked ``@pytest.mark.criterion(n, "title")`` are grouped by criterion
number; a criterion passes when every test carrying its number passes. Each
test can attach measured values through the ``evidence`` fixture, and the
terminal summary prints one PASS/FAIL line per criterion.
"""

import pytest

_RESULTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.fixture
def evidence(request):
    """Append ``"key=value"`` strings shown next to the criterion verdict."""
    notes = []
    request.node.user_properties.append(("evidence", notes))
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        number, title = marker.args
        entry = _RESULTS.setdefault(number, {"title": title, "passed": True, "notes": []})
        entry["passed"] = entry["passed"] and report.passed
        for key, notes in item.user_properties:
            if key == "evidence":
                entry["notes"].extend(notes)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        verdict = "PASS" if entry["passed"] else "FAIL"
        line = f"{verdict}  criterion {number:>2}: {entry['title']}"
        if entry["notes"]:
            line += "  [" + "; ".join(entry["notes"]) + "]"
        terminalreporter.write_line(line)
