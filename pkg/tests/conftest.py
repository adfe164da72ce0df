"""Collects acceptance-criterion outcomes and prints one PASS/FAIL line per criterion at the end of the run."""

from __future__ import annotations

import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            n, title = m.args
            _results.setdefault(n, {"title": title, "outcomes": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _results[m.args[0]]["outcomes"].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        r = _results[n]
        if not r["outcomes"]:
            status = "NOT RUN"
        else:
            status = "PASS" if all(r["outcomes"]) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}  {status:7s}  {r['title']}")
